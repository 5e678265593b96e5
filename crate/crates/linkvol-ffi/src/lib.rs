//! C ABI over `linkvol`.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free`. Every fallible call returns an [`LvStatus`]
//! and records a message retrievable with [`lv_last_error_message`] on the
//! calling thread.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linkvol::coloring::{ColoringError, ColoringFile};
use linkvol::diagram::{load_diagram, DiagramError, LinkDiagram};
use linkvol::engine::{multi_start, EngineError, Found, SolveConfig};
use linkvol::numerics::{dilog, NumericsError};
use linkvol::potential::{w0, PotentialError, Solution, VolumeResult};
use linkvol::representation::{
    complete_representation, ComponentFilling, FillingSpec, Mat2, Representation, RepresentationError, Slope,
};
use linkvol::C64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Diagram = 3,
    Representation = 4,
    Coloring = 5,
    Potential = 6,
    Solver = 7,
    Numerics = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LvComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for LvComplex {
    fn from(z: C64) -> Self {
        LvComplex { re: z.re, im: z.im }
    }
}

impl From<LvComplex> for C64 {
    fn from(z: LvComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Dehn filling data for one component. `filled = false` means the
/// component is left complete and the other fields are ignored. When
/// `has_uv` is false, `(u, v)` is derived from `m` and `l`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LvFilling {
    pub filled: bool,
    pub r: i64,
    pub s: i64,
    pub l: LvComplex,
    pub has_uv: bool,
    pub u: i64,
    pub v: i64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LvVolume {
    /// `W0`, congruent to `i(vol + i cs)` modulo π².
    pub w0: LvComplex,
    pub vol: f64,
    /// In `[0, π²)`.
    pub cs: f64,
    pub residual_max: f64,
}

impl From<&VolumeResult> for LvVolume {
    fn from(r: &VolumeResult) -> Self {
        LvVolume { w0: r.w0.into(), vol: r.vol, cs: r.cs, residual_max: r.residual_max }
    }
}

pub struct LvDiagram(LinkDiagram);
pub struct LvRepresentation(Representation);
pub struct LvSolution(Solution);
pub struct LvSolutionList(Vec<Found>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(LvStatus, String);

impl From<DiagramError> for Fail {
    fn from(e: DiagramError) -> Self {
        Fail(LvStatus::Diagram, e.to_string())
    }
}

impl From<RepresentationError> for Fail {
    fn from(e: RepresentationError) -> Self {
        Fail(LvStatus::Representation, e.to_string())
    }
}

impl From<ColoringError> for Fail {
    fn from(e: ColoringError) -> Self {
        Fail(LvStatus::Coloring, e.to_string())
    }
}

impl From<PotentialError> for Fail {
    fn from(e: PotentialError) -> Self {
        Fail(LvStatus::Potential, e.to_string())
    }
}

impl From<EngineError> for Fail {
    fn from(e: EngineError) -> Self {
        Fail(LvStatus::Solver, e.to_string())
    }
}

impl From<NumericsError> for Fail {
    fn from(e: NumericsError) -> Self {
        Fail(LvStatus::Numerics, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> LvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LvStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(LvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn complexes(zs: &[LvComplex]) -> Vec<C64> {
    zs.iter().map(|&z| z.into()).collect()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a PD code (`X[a,b,c,d] ...`) or diagram JSON.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lv_diagram_parse(text: *const c_char, out: *mut *mut LvDiagram) -> LvStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Fail(LvStatus::InvalidArgument, format!("text is not UTF-8: {e}")))?;
        let d = load_diagram(text)?;
        write(out, boxed(LvDiagram(d)), "out")
    })
}

/// # Safety
/// `d` must come from [`lv_diagram_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lv_diagram_free(d: *mut LvDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live diagram handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn lv_diagram_region_count(d: *const LvDiagram) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_regions)
}

/// # Safety
/// `d` must be a live diagram handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn lv_diagram_component_count(d: *const LvDiagram) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_components())
}

/// # Safety
/// `d` must be a live diagram handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn lv_diagram_crossing_count(d: *const LvDiagram) -> usize {
    d.as_ref().map_or(0, |d| d.0.crossings.len())
}

/// Number of Wirtinger generators (over-arcs).
///
/// # Safety
/// `d` must be a live diagram handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn lv_diagram_generator_count(d: *const LvDiagram) -> usize {
    d.as_ref().map_or(0, |d| d.0.n_generators())
}

/// Complete a representation from `count` generator images. Generator
/// `generators[k]` (0-based) maps to the 2×2 matrix stored row-major in
/// `matrices[4k..4k+4]`.
///
/// # Safety
/// `generators` must hold `count` entries and `matrices` `4 * count`.
#[no_mangle]
pub unsafe extern "C" fn lv_representation_complete(
    d: *const LvDiagram,
    generators: *const usize,
    matrices: *const LvComplex,
    count: usize,
    out: *mut *mut LvRepresentation,
) -> LvStatus {
    guard(|| {
        let d = deref(d, "diagram")?;
        let gens = slice(generators, count, "generators")?;
        let mats = slice(matrices, 4 * count, "matrices")?;
        let mut partial = BTreeMap::new();
        for (k, &g) in gens.iter().enumerate() {
            let e = &mats[4 * k..4 * k + 4];
            partial.insert(g, Mat2::new(e[0].into(), e[1].into(), e[2].into(), e[3].into()));
        }
        let rho = complete_representation(&d.0, &partial)?;
        write(out, boxed(LvRepresentation(rho)), "out")
    })
}

/// # Safety
/// `r` must come from [`lv_representation_complete`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lv_representation_free(r: *mut LvRepresentation) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Row-major image of generator `g`.
///
/// # Safety
/// Handles must be live; `out` must hold 4 values.
#[no_mangle]
pub unsafe extern "C" fn lv_representation_generator(
    r: *const LvRepresentation,
    g: usize,
    out: *mut LvComplex,
) -> LvStatus {
    guard(|| {
        let r = deref(r, "representation")?;
        let m =
            *r.0.matrices()
                .get(g)
                .ok_or_else(|| Fail(LvStatus::InvalidArgument, format!("generator {g} out of range")))?;
        if out.is_null() {
            return Err(null("out"));
        }
        for (k, z) in [m.a, m.b, m.c, m.d].into_iter().enumerate() {
            out.add(k).write(z.into());
        }
        Ok(())
    })
}

/// Meridian eigenvalue `m_i` of component `i`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lv_representation_meridian(
    d: *const LvDiagram,
    r: *const LvRepresentation,
    component: usize,
    out: *mut LvComplex,
) -> LvStatus {
    guard(|| {
        let (d, r) = (deref(d, "diagram")?, deref(r, "representation")?);
        let m = r.0.meridian_eigenvalue(&d.0, component)?;
        write(out, m.into(), "out")
    })
}

/// Longitude eigenvalue `l_i` matching [`lv_representation_meridian`].
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lv_representation_longitude(
    d: *const LvDiagram,
    r: *const LvRepresentation,
    component: usize,
    out: *mut LvComplex,
) -> LvStatus {
    guard(|| {
        let (d, r) = (deref(d, "diagram")?, deref(r, "representation")?);
        let l = r.0.longitude_eigenvalue(&d.0, component)?;
        write(out, l.into(), "out")
    })
}

/// Solution point from a region coloring: `seed_v` (2 entries) is placed in
/// `seed_region` and `w` (2 entries) is the auxiliary vector.
///
/// # Safety
/// Handles must be live; `seed_v` and `w` must hold 2 values each.
#[no_mangle]
pub unsafe extern "C" fn lv_solution_from_coloring(
    d: *const LvDiagram,
    r: *const LvRepresentation,
    seed_region: usize,
    seed_v: *const LvComplex,
    w: *const LvComplex,
    out: *mut *mut LvSolution,
) -> LvStatus {
    guard(|| {
        let (d, r) = (deref(d, "diagram")?, deref(r, "representation")?);
        let v = slice(seed_v, 2, "seed_v")?;
        let w = slice(w, 2, "w")?;
        let file = ColoringFile::new(seed_region, [v[0].into(), v[1].into()], [w[0].into(), w[1].into()]);
        let s = file.apply(&d.0, &r.0)?.assemble_solution(&d.0, &r.0)?;
        write(out, boxed(LvSolution(s)), "out")
    })
}

/// Solution point from explicit coordinates.
///
/// # Safety
/// `w` must hold `n_w` values and `m` `n_m` values.
#[no_mangle]
pub unsafe extern "C" fn lv_solution_new(
    d: *const LvDiagram,
    w: *const LvComplex,
    n_w: usize,
    m: *const LvComplex,
    n_m: usize,
    out: *mut *mut LvSolution,
) -> LvStatus {
    guard(|| {
        let d = deref(d, "diagram")?;
        let s = Solution::new(&d.0, complexes(slice(w, n_w, "w")?), complexes(slice(m, n_m, "m")?))?;
        write(out, boxed(LvSolution(s)), "out")
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lv_solution_free(s: *mut LvSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Copy the region values into `out` (capacity `cap`); returns the number
/// of regions, which may exceed `cap`.
///
/// # Safety
/// `out` must hold `cap` values (may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn lv_solution_regions(s: *const LvSolution, out: *mut LvComplex, cap: usize) -> usize {
    copy_out(s.as_ref().map(|s| s.0.w.as_slice()), out, cap)
}

/// Copy the meridian values into `out`; same contract as
/// [`lv_solution_regions`].
///
/// # Safety
/// `out` must hold `cap` values (may be null when `cap` is 0).
#[no_mangle]
pub unsafe extern "C" fn lv_solution_meridians(s: *const LvSolution, out: *mut LvComplex, cap: usize) -> usize {
    copy_out(s.as_ref().map(|s| s.0.m.as_slice()), out, cap)
}

unsafe fn copy_out(src: Option<&[C64]>, out: *mut LvComplex, cap: usize) -> usize {
    let Some(src) = src else { return 0 };
    if !out.is_null() {
        for (k, &z) in src.iter().take(cap).enumerate() {
            out.add(k).write(z.into());
        }
    }
    src.len()
}

fn filling_spec(fills: &[LvFilling]) -> Result<FillingSpec, Fail> {
    let components = fills
        .iter()
        .map(|f| {
            if !f.filled {
                return Ok(ComponentFilling::unfilled());
            }
            Ok(ComponentFilling {
                slope: Slope::finite(f.r, f.s)?,
                l: Some(f.l.into()),
                uv: f.has_uv.then_some((f.u, f.v)),
            })
        })
        .collect::<Result<_, Fail>>()?;
    Ok(FillingSpec { components })
}

/// `W0`, volume and Chern-Simons invariant of a solution with one
/// [`LvFilling`] per component.
///
/// # Safety
/// Handles must be live; `fills` must hold `n_fills` entries.
#[no_mangle]
pub unsafe extern "C" fn lv_volume(
    d: *const LvDiagram,
    s: *const LvSolution,
    fills: *const LvFilling,
    n_fills: usize,
    out: *mut LvVolume,
) -> LvStatus {
    guard(|| {
        let (d, s) = (deref(d, "diagram")?, deref(s, "solution")?);
        let mut spec = filling_spec(slice(fills, n_fills, "fills")?)?;
        spec.complete_uv(&s.0.m)?;
        let r = w0(&d.0, &s.0, &spec)?;
        write(out, LvVolume::from(&r), "out")
    })
}

/// Newton from `seeds` random starts at fixed meridian values; distinct
/// solutions sorted by volume, evaluated without filling.
///
/// # Safety
/// `m` must hold one value per component.
#[no_mangle]
pub unsafe extern "C" fn lv_multi_start(
    d: *const LvDiagram,
    m: *const LvComplex,
    n_m: usize,
    seeds: usize,
    rng_seed: u64,
    out: *mut *mut LvSolutionList,
) -> LvStatus {
    guard(|| {
        let d = deref(d, "diagram")?;
        let m = complexes(slice(m, n_m, "m")?);
        if m.len() != d.0.n_components() {
            return Err(Fail(
                LvStatus::InvalidArgument,
                format!("{} meridian values for {} components", m.len(), d.0.n_components()),
            ));
        }
        let cfg = SolveConfig { seeds, rng_seed, ..SolveConfig::default() };
        write(out, boxed(LvSolutionList(multi_start(&d.0, &m, &cfg))), "out")
    })
}

/// # Safety
/// `l` must be a live list handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn lv_solution_list_len(l: *const LvSolutionList) -> usize {
    l.as_ref().map_or(0, |l| l.0.len())
}

/// Unfilled volume data of entry `i`.
///
/// # Safety
/// `l` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lv_solution_list_volume(l: *const LvSolutionList, i: usize, out: *mut LvVolume) -> LvStatus {
    guard(|| {
        let f = list_entry(l, i)?;
        write(out, LvVolume::from(&f.result), "out")
    })
}

/// Copy of entry `i` as an owned solution handle.
///
/// # Safety
/// `l` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lv_solution_list_get(
    l: *const LvSolutionList,
    i: usize,
    out: *mut *mut LvSolution,
) -> LvStatus {
    guard(|| {
        let f = list_entry(l, i)?;
        write(out, boxed(LvSolution(f.solution.clone())), "out")
    })
}

unsafe fn list_entry<'a>(l: *const LvSolutionList, i: usize) -> Result<&'a Found, Fail> {
    deref(l, "list")?.0.get(i).ok_or_else(|| Fail(LvStatus::InvalidArgument, format!("index {i} out of range")))
}

/// # Safety
/// `l` must come from [`lv_multi_start`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn lv_solution_list_free(l: *mut LvSolutionList) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Principal-branch dilogarithm.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lv_dilog(z: LvComplex, out: *mut LvComplex) -> LvStatus {
    guard(|| {
        let v = dilog(z.into())?;
        write(out, v.into(), "out")
    })
}
