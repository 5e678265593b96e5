//! SL(2,ℂ) representations of the Wirtinger presentation, peripheral
//! eigenvalues and Dehn-filling data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Mul;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::diagram::{LinkDiagram, Word};
use crate::numerics::{from_pair, plog, to_pair, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepresentationError {
    #[error("relations inconsistent (residual {0:.3e})")]
    RelationsInconsistent(f64),
    #[error("insufficient generators: propagation stalls")]
    InsufficientGenerators,
    #[error("generator g{} has determinant {det}, expected 1", .generator + 1)]
    NotUnimodular { generator: usize, det: C64 },
    #[error("generator index g{} out of range", .0 + 1)]
    GeneratorIndex(usize),
    #[error("ρ(μ_{0}) = ±I violated")]
    TrivialMeridian(usize),
    #[error("longitude and meridian of component {0} do not commute")]
    NonCommuting(usize),
    #[error("component index {0} out of range")]
    ComponentIndex(usize),
    #[error("slope ({r},{s}) is not a coprime pair")]
    NotCoprime { r: i64, s: i64 },
    #[error("not a valid filling pair (residual {0:.3e})")]
    NotFillingPair(f64),
    #[error("representation does not satisfy the filling on component {component} (residual {residual:.3e})")]
    FillingResidual { component: usize, residual: f64 },
    #[error("component {component} is unfilled but ρ is not boundary parabolic there")]
    NotParabolic { component: usize },
    #[error("filling data for component {0} lacks {1}")]
    MissingFillingData(usize, &'static str),
    #[error("filling has {got} components, diagram has {want}")]
    FillingArity { got: usize, want: usize },
    #[error("invalid JSON: {0}")]
    Json(String),
}

const DET_TOL: f64 = 1e-9;
const PM_IDENTITY_TOL: f64 = 1e-6;
const RELATION_TOL: f64 = 1e-6;
const FILLING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Mat2::new(o, z, z, o)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Mat2 {
        let det = self.det();
        Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn pow(&self, e: i8) -> Mat2 {
        if e >= 0 {
            *self
        } else {
            self.inverse()
        }
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        [self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Mat2 {
        Mat2::new(self.a.conj(), self.b.conj(), self.c.conj(), self.d.conj())
    }

    pub fn is_pm_identity(&self, tol: f64) -> bool {
        let i = Mat2::identity();
        let neg = Mat2::new(-i.a, i.b, i.c, -i.d);
        self.max_abs_diff(&i) <= tol || self.max_abs_diff(&neg) <= tol
    }

    /// Row-major `[[re,im]; 4]`.
    pub fn to_pairs(&self) -> [[f64; 2]; 4] {
        [to_pair(self.a), to_pair(self.b), to_pair(self.c), to_pair(self.d)]
    }

    pub fn from_pairs(p: [[f64; 2]; 4]) -> Mat2 {
        Mat2::new(from_pair(p[0]), from_pair(p[1]), from_pair(p[2]), from_pair(p[3]))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

/// One unimodular matrix per Wirtinger generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    mats: Vec<Mat2>,
}

fn relation_residual(d: &LinkDiagram, mats: &[Mat2]) -> f64 {
    d.wirtinger()
        .iter()
        .map(|r| {
            let g = mats[r.over].pow(r.sign);
            let want = g * mats[r.input] * g.inverse();
            let scale = 1.0 + mats[r.output].max_abs_diff(&Mat2::new(0.0.into(), 0.0.into(), 0.0.into(), 0.0.into()));
            mats[r.output].max_abs_diff(&want) / scale
        })
        .fold(0.0, f64::max)
}

fn check_unimodular(generator: usize, m: &Mat2) -> Result<(), RepresentationError> {
    let det = m.det();
    if (det - 1.0).norm() > DET_TOL || !det.is_finite() {
        return Err(RepresentationError::NotUnimodular { generator, det });
    }
    Ok(())
}

/// Fill every generator from a generating subset by the Wirtinger relations.
pub fn complete_representation(
    d: &LinkDiagram,
    partial: &BTreeMap<usize, Mat2>,
) -> Result<Representation, RepresentationError> {
    let n = d.n_generators();
    let mut mats: Vec<Option<Mat2>> = vec![None; n];
    for (&g, m) in partial {
        if g >= n {
            return Err(RepresentationError::GeneratorIndex(g));
        }
        check_unimodular(g, m)?;
        mats[g] = Some(*m);
    }
    let rels = d.wirtinger();
    let mut changed = true;
    while changed {
        changed = false;
        for r in &rels {
            let Some(over) = mats[r.over] else { continue };
            let g = over.pow(r.sign);
            match (mats[r.input], mats[r.output]) {
                (Some(a), None) => {
                    mats[r.output] = Some(g * a * g.inverse());
                    changed = true;
                }
                (None, Some(b)) => {
                    mats[r.input] = Some(g.inverse() * b * g);
                    changed = true;
                }
                _ => {}
            }
        }
    }
    let mats: Vec<Mat2> = mats.into_iter().collect::<Option<_>>().ok_or(RepresentationError::InsufficientGenerators)?;
    Representation::new(d, mats)
}

impl Representation {
    /// Validate a full assignment of generator matrices.
    pub fn new(d: &LinkDiagram, mats: Vec<Mat2>) -> Result<Self, RepresentationError> {
        if mats.len() != d.n_generators() {
            return Err(RepresentationError::GeneratorIndex(mats.len().min(d.n_generators())));
        }
        for (g, m) in mats.iter().enumerate() {
            check_unimodular(g, m)?;
        }
        let res = relation_residual(d, &mats);
        if !(res <= RELATION_TOL) {
            return Err(RepresentationError::RelationsInconsistent(res));
        }
        for (i, &mu) in d.meridians.iter().enumerate() {
            if mats[mu].is_pm_identity(PM_IDENTITY_TOL) {
                return Err(RepresentationError::TrivialMeridian(i));
            }
        }
        Ok(Representation { mats })
    }

    pub fn matrices(&self) -> &[Mat2] {
        &self.mats
    }

    pub fn generator(&self, g: usize) -> Mat2 {
        self.mats[g]
    }

    /// Largest relative Wirtinger residual.
    pub fn relation_residual(&self, d: &LinkDiagram) -> f64 {
        relation_residual(d, &self.mats)
    }

    pub fn evaluate_word(&self, word: &Word) -> Mat2 {
        word.0.iter().fold(Mat2::identity(), |acc, &(g, e)| acc * self.mats[g].pow(e))
    }

    /// Entrywise complex conjugate representation.
    pub fn conj(&self) -> Representation {
        Representation { mats: self.mats.iter().map(Mat2::conj).collect() }
    }

    fn meridian(&self, d: &LinkDiagram, i: usize) -> Result<Mat2, RepresentationError> {
        let mu = *d.meridians.get(i).ok_or(RepresentationError::ComponentIndex(i))?;
        let m = self.mats[mu];
        if m.is_pm_identity(PM_IDENTITY_TOL) {
            return Err(RepresentationError::TrivialMeridian(i));
        }
        Ok(m)
    }

    /// Eigenvalue `m_i` of the meridian image: the (1,1) entry when the
    /// matrix is upper triangular, otherwise the root with `arg ∈ [0, π]`.
    pub fn meridian_eigenvalue(&self, d: &LinkDiagram, i: usize) -> Result<C64, RepresentationError> {
        let mm = self.meridian(d, i)?;
        if mm.c.norm() <= 1e-14 * (1.0 + mm.a.norm() + mm.b.norm() + mm.d.norm()) {
            return Ok(mm.a);
        }
        let tr = mm.trace();
        let disc = (tr * tr - 4.0).sqrt();
        let r1 = (tr + disc) / 2.0;
        let r2 = (tr - disc) / 2.0;
        let up = |z: C64| {
            let a = plog(z).im;
            a >= 0.0
        };
        Ok(if up(r1) && (!up(r2) || r1.norm() >= r2.norm()) {
            r1
        } else if up(r2) {
            r2
        } else {
            r1
        })
    }

    fn eigenvector(mm: &Mat2, m: C64) -> [C64; 2] {
        let v1 = [mm.b, m - mm.a];
        let v2 = [m - mm.d, mm.c];
        let n = |v: &[C64; 2]| v[0].norm() + v[1].norm();
        if n(&v1) >= n(&v2) {
            v1
        } else {
            v2
        }
    }

    /// Eigenvalue of the longitude image on the eigenvector of `m_i`.
    pub fn longitude_eigenvalue(&self, d: &LinkDiagram, i: usize) -> Result<C64, RepresentationError> {
        let mm = self.meridian(d, i)?;
        let m = self.meridian_eigenvalue(d, i)?;
        let word = d.longitude_word(i).map_err(|_| RepresentationError::ComponentIndex(i))?;
        let ll = self.evaluate_word(&word);
        let comm = (ll * mm).max_abs_diff(&(mm * ll));
        let scale = 1.0 + [ll.a, ll.b, ll.c, ll.d].iter().map(|z| z.norm()).fold(0.0, f64::max);
        if comm > 1e-8 * scale * scale {
            return Err(RepresentationError::NonCommuting(i));
        }
        let v = Self::eigenvector(&mm, m);
        let lv = ll.apply(v);
        let k = if v[0].norm() >= v[1].norm() { 0 } else { 1 };
        Ok(lv[k] / v[k])
    }

    /// Boundary-parabolic test for component `i`.
    pub fn is_parabolic(&self, d: &LinkDiagram, i: usize) -> Result<bool, RepresentationError> {
        let mm = self.meridian(d, i)?;
        let word = d.longitude_word(i).map_err(|_| RepresentationError::ComponentIndex(i))?;
        let ll = self.evaluate_word(&word);
        let near2 = |t: C64| (t - 2.0).norm() <= FILLING_TOL || (t + 2.0).norm() <= FILLING_TOL;
        Ok(near2(mm.trace()) && near2(ll.trace()))
    }
}

/// Representation file: `{"generators": {"g1": [[re,im] x4], ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationFile {
    pub generators: BTreeMap<String, [[f64; 2]; 4]>,
}

impl RepresentationFile {
    /// Generator map keyed by 0-based arc index.
    pub fn partial(&self) -> Result<BTreeMap<usize, Mat2>, RepresentationError> {
        self.generators
            .iter()
            .map(|(k, v)| {
                let idx = k
                    .strip_prefix('g')
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| RepresentationError::Json(format!("bad generator key {k:?}")))?;
                Ok((idx - 1, Mat2::from_pairs(*v)))
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, RepresentationError> {
        serde_json::from_str(text).map_err(|e| RepresentationError::Json(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slope {
    Infinite,
    Finite { r: i64, s: i64 },
}

impl Slope {
    /// Normalized so that `s >= 0` (and `r = 1` when `s = 0`).
    pub fn finite(r: i64, s: i64) -> Result<Slope, RepresentationError> {
        if r.gcd(&s) != 1 {
            return Err(RepresentationError::NotCoprime { r, s });
        }
        Ok(if s < 0 || (s == 0 && r < 0) { Slope::Finite { r: -r, s: -s } } else { Slope::Finite { r, s } })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentFilling {
    pub slope: Slope,
    pub l: Option<C64>,
    pub uv: Option<(i64, i64)>,
}

impl ComponentFilling {
    pub fn unfilled() -> Self {
        ComponentFilling { slope: Slope::Infinite, l: None, uv: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillingSpec {
    pub components: Vec<ComponentFilling>,
}

/// `r log m + s log l + πi(ru + sv)`.
pub fn filling_residual(m: C64, l: C64, r: i64, s: i64, u: i64, v: i64) -> C64 {
    r as f64 * plog(m) + s as f64 * plog(l) + C64::new(0.0, PI * (r * u + s * v) as f64)
}

/// Integers `(u, v)` with `r log m + s log l + πi(ru + sv) = 0`.
///
/// Among the lattice `(u + s t, v − r t)` the pair minimizing `|v|`, then
/// `|u|`, then preferring `u ≥ 0`, is returned.
pub fn solve_uv(m: C64, l: C64, r: i64, s: i64) -> Result<(i64, i64), RepresentationError> {
    if r.gcd(&s) != 1 {
        return Err(RepresentationError::NotCoprime { r, s });
    }
    let x = (r as f64 * plog(m) + s as f64 * plog(l)) / C64::new(0.0, PI);
    let n = x.re.round();
    let miss = (x - n).norm() * PI;
    if !(miss <= FILLING_TOL) {
        return Err(RepresentationError::NotFillingPair(miss));
    }
    let n = n as i64;
    let e = r.extended_gcd(&s);
    // r*x + s*y = g with g = ±1
    let (u0, v0) = (-n * e.x * e.gcd, -n * e.y * e.gcd);
    let key = |t: i64| {
        let (u, v) = (u0 + s * t, v0 - r * t);
        (v.abs(), u.abs(), u < 0)
    };
    let t = if r == 0 {
        -u0 / s
    } else {
        let t0 = (v0 as f64 / r as f64).round() as i64;
        (t0 - 2..=t0 + 2).min_by_key(|&t| key(t)).expect("nonempty range")
    };
    Ok((u0 + s * t, v0 - r * t))
}

impl FillingSpec {
    pub fn unfilled(h: usize) -> Self {
        FillingSpec { components: vec![ComponentFilling::unfilled(); h] }
    }

    /// Check the filling equations against meridian eigenvalues `m`.
    pub fn validate(&self, m: &[C64]) -> Result<(), RepresentationError> {
        if self.components.len() != m.len() {
            return Err(RepresentationError::FillingArity { got: self.components.len(), want: m.len() });
        }
        for (i, (f, &mi)) in self.components.iter().zip(m).enumerate() {
            let Slope::Finite { r, s } = f.slope else { continue };
            if r.gcd(&s) != 1 {
                return Err(RepresentationError::NotCoprime { r, s });
            }
            let l = f.l.ok_or(RepresentationError::MissingFillingData(i, "l"))?;
            let (u, v) = f.uv.ok_or(RepresentationError::MissingFillingData(i, "(u, v)"))?;
            let residual = filling_residual(mi, l, r, s, u, v).norm();
            if !(residual <= FILLING_TOL) {
                return Err(RepresentationError::FillingResidual { component: i, residual });
            }
        }
        Ok(())
    }

    /// Fill in `l` from `ρ` and `(u, v)` by [`solve_uv`] where missing, then
    /// validate, including boundary-parabolicity of unfilled components.
    pub fn complete_from(&mut self, d: &LinkDiagram, rho: &Representation) -> Result<(), RepresentationError> {
        let h = d.n_components();
        if self.components.len() != h {
            return Err(RepresentationError::FillingArity { got: self.components.len(), want: h });
        }
        let mut ms = Vec::with_capacity(h);
        for i in 0..h {
            let m = rho.meridian_eigenvalue(d, i)?;
            let l = rho.longitude_eigenvalue(d, i)?;
            ms.push(m);
            let f = &mut self.components[i];
            match f.slope {
                Slope::Infinite => {
                    if !rho.is_parabolic(d, i)? {
                        return Err(RepresentationError::NotParabolic { component: i });
                    }
                    f.l.get_or_insert(l);
                }
                Slope::Finite { r, s } => {
                    let l = *f.l.get_or_insert(l);
                    if f.uv.is_none() {
                        f.uv = Some(solve_uv(m, l, r, s).map_err(|e| match e {
                            RepresentationError::NotFillingPair(residual) => {
                                RepresentationError::FillingResidual { component: i, residual }
                            }
                            e => e,
                        })?);
                    }
                }
            }
        }
        self.validate(&ms)
    }

    /// Derive missing `(u, v)` from supplied `l` values and meridian
    /// eigenvalues `m`.
    pub fn complete_uv(&mut self, m: &[C64]) -> Result<(), RepresentationError> {
        if self.components.len() != m.len() {
            return Err(RepresentationError::FillingArity { got: self.components.len(), want: m.len() });
        }
        for (i, (f, &mi)) in self.components.iter_mut().zip(m).enumerate() {
            let Slope::Finite { r, s } = f.slope else { continue };
            if f.uv.is_some() {
                continue;
            }
            let l = f.l.ok_or(RepresentationError::MissingFillingData(i, "l"))?;
            f.uv = Some(solve_uv(mi, l, r, s).map_err(|e| match e {
                RepresentationError::NotFillingPair(residual) => {
                    RepresentationError::FillingResidual { component: i, residual }
                }
                e => e,
            })?);
        }
        Ok(())
    }

    pub fn to_file(&self) -> FillingFile {
        FillingFile {
            slopes: self
                .components
                .iter()
                .map(|f| match f.slope {
                    Slope::Infinite => SlopeEntry::Inf(InfTag::Inf),
                    Slope::Finite { r, s } => SlopeEntry::Pair([r, s]),
                })
                .collect(),
            l: self.components.iter().map(|f| f.l.map(to_pair)).collect(),
            uv: self.components.iter().map(|f| f.uv.map(|(u, v)| [u, v])).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlopeEntry {
    Inf(InfTag),
    Pair([i64; 2]),
}

/// Filling file: `{"slopes": ["inf" | [r,s]], "l": [[re,im],...], "uv": [[u,v],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FillingFile {
    pub slopes: Vec<SlopeEntry>,
    #[serde(default)]
    pub l: Vec<Option<[f64; 2]>>,
    #[serde(default)]
    pub uv: Vec<Option<[i64; 2]>>,
}

impl FillingFile {
    pub fn from_json(text: &str) -> Result<Self, RepresentationError> {
        serde_json::from_str(text).map_err(|e| RepresentationError::Json(e.to_string()))
    }

    pub fn to_spec(&self) -> Result<FillingSpec, RepresentationError> {
        let components = self
            .slopes
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let slope = match *s {
                    SlopeEntry::Inf(_) => Slope::Infinite,
                    SlopeEntry::Pair([r, s]) => Slope::finite(r, s)?,
                };
                let l = self.l.get(i).copied().flatten().map(from_pair);
                let uv = self.uv.get(i).copied().flatten().map(|[u, v]| (u, v));
                // normalization of (r,s) flips the sign of (u,v) too
                let uv = match (slope, s) {
                    (Slope::Finite { r, .. }, SlopeEntry::Pair([r0, _])) if r != *r0 => uv.map(|(u, v)| (-u, -v)),
                    _ => uv,
                };
                Ok(ComponentFilling { slope, l, uv })
            })
            .collect::<Result<_, RepresentationError>>()?;
        Ok(FillingSpec { components })
    }
}
