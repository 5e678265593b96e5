use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use linkvol_ffi::*;

const FIG8_PD: &str = include_str!("../../linkvol/data/figure8.pd");
const WH_PD: &str = include_str!("../../linkvol/data/whitehead.pd");

const FIG8_M: LvComplex = LvComplex { re: -1.3066423495115913, im: 0.049875830231792866 };
const FIG8_L: LvComplex = LvComplex { re: -0.4364234824298843, im: 0.7133707358540314 };

fn cx(re: f64, im: f64) -> LvComplex {
    LvComplex { re, im }
}

fn parse(text: &str) -> *mut LvDiagram {
    let text = CString::new(text).unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { lv_diagram_parse(text.as_ptr(), &mut d) }, LvStatus::Ok);
    assert!(!d.is_null());
    d
}

fn last_error() -> String {
    let p = lv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn figure8_y(m: LvComplex) -> LvComplex {
    let m = linkvol::C64::new(m.re, m.im);
    let m2 = m * m;
    let disc = m2.powi(4) - 2.0 * m2.powi(3) - m2.powi(2) - 2.0 * m2 + 1.0;
    let y = (-m2 * m2 + 3.0 * m2 - 1.0 + disc.sqrt()) / (2.0 * m2);
    cx(y.re, y.im)
}

fn figure8_rep(d: *const LvDiagram, m: LvComplex) -> *mut LvRepresentation {
    let inv = {
        let z = linkvol::C64::new(m.re, m.im).inv();
        cx(z.re, z.im)
    };
    let zero = cx(0.0, 0.0);
    let mats = [m, cx(1.0, 0.0), zero, inv, m, zero, figure8_y(m), inv];
    let mut r = ptr::null_mut();
    let st = unsafe { lv_representation_complete(d, [0usize, 1].as_ptr(), mats.as_ptr(), 2, &mut r) };
    assert_eq!(st, LvStatus::Ok);
    r
}

#[test]
fn diagram_counts() {
    let d = parse(FIG8_PD);
    unsafe {
        assert_eq!(lv_diagram_crossing_count(d), 4);
        assert_eq!(lv_diagram_region_count(d), 6);
        assert_eq!(lv_diagram_component_count(d), 1);
        assert_eq!(lv_diagram_generator_count(d), 4);
        lv_diagram_free(d);
    }
    let w = parse(WH_PD);
    unsafe {
        assert_eq!(lv_diagram_component_count(w), 2);
        assert_eq!(lv_diagram_region_count(w), 7);
        lv_diagram_free(w);
    }
}

#[test]
fn figure8_filled_volume() {
    let d = parse(FIG8_PD);
    let r = figure8_rep(d, FIG8_M);
    unsafe {
        let mut l = LvComplex::default();
        assert_eq!(lv_representation_longitude(d, r, 0, &mut l), LvStatus::Ok);
        assert!((l.re - FIG8_L.re).abs() < 1e-8 && (l.im - FIG8_L.im).abs() < 1e-8);

        let mut s = ptr::null_mut();
        let seed = [cx(1.0, 0.0), cx(0.0, 1.0)];
        let aux = [cx(2.0, 0.0), cx(1.0, 0.0)];
        assert_eq!(lv_solution_from_coloring(d, r, 1, seed.as_ptr(), aux.as_ptr(), &mut s), LvStatus::Ok);
        assert_eq!(lv_solution_regions(s, ptr::null_mut(), 0), 6);
        let mut m = [LvComplex::default(); 1];
        assert_eq!(lv_solution_meridians(s, m.as_mut_ptr(), 1), 1);
        assert!((m[0].re - FIG8_M.re).abs() < 1e-12);

        let fill = LvFilling { filled: true, r: 2, s: 3, l, has_uv: false, u: 0, v: 0 };
        let mut v = LvVolume::default();
        assert_eq!(lv_volume(d, s, &fill, 1, &mut v), LvStatus::Ok);
        assert!((v.vol - 1.73712).abs() < 1e-4, "{v:?}");
        assert!((v.cs - 3.33836).abs() < 1e-4, "{v:?}");
        assert!(v.residual_max < 1e-6);

        lv_solution_free(s);
        lv_representation_free(r);
        lv_diagram_free(d);
    }
}

#[test]
fn explicit_solution_round_trip() {
    let d = parse(FIG8_PD);
    let r = figure8_rep(d, FIG8_M);
    unsafe {
        let mut s = ptr::null_mut();
        let seed = [cx(1.0, 0.0), cx(0.0, 1.0)];
        let aux = [cx(2.0, 0.0), cx(1.0, 0.0)];
        assert_eq!(lv_solution_from_coloring(d, r, 1, seed.as_ptr(), aux.as_ptr(), &mut s), LvStatus::Ok);
        let mut w = [LvComplex::default(); 6];
        lv_solution_regions(s, w.as_mut_ptr(), 6);
        let mut t = ptr::null_mut();
        assert_eq!(lv_solution_new(d, w.as_ptr(), 6, &FIG8_M, 1, &mut t), LvStatus::Ok);
        let mut w2 = [LvComplex::default(); 6];
        lv_solution_regions(t, w2.as_mut_ptr(), 6);
        assert_eq!(w, w2);

        let mut bad = ptr::null_mut();
        assert_eq!(lv_solution_new(d, w.as_ptr(), 5, &FIG8_M, 1, &mut bad), LvStatus::Potential);
        assert!(bad.is_null());
        assert!(!last_error().is_empty());

        lv_solution_free(s);
        lv_solution_free(t);
        lv_representation_free(r);
        lv_diagram_free(d);
    }
}

#[test]
fn multi_start_parabolic() {
    let d = parse(FIG8_PD);
    unsafe {
        let mut list = ptr::null_mut();
        assert_eq!(lv_multi_start(d, &cx(1.0, 0.0), 1, 8, 7, &mut list), LvStatus::Ok);
        let n = lv_solution_list_len(list);
        assert!(n >= 1);
        let mut v = LvVolume::default();
        assert_eq!(lv_solution_list_volume(list, 0, &mut v), LvStatus::Ok);
        assert!((v.vol.abs() - 2.029883212819307).abs() < 1e-8, "{v:?}");

        let mut s = ptr::null_mut();
        assert_eq!(lv_solution_list_get(list, 0, &mut s), LvStatus::Ok);
        let mut again = LvVolume::default();
        assert_eq!(lv_volume(d, s, ptr::null(), 0, &mut again), LvStatus::Representation);
        let open = LvFilling::default();
        assert_eq!(lv_volume(d, s, &open, 1, &mut again), LvStatus::Ok);
        assert!((again.vol - v.vol).abs() < 1e-10);

        assert_eq!(lv_solution_list_volume(list, n, &mut v), LvStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));

        lv_solution_free(s);
        lv_solution_list_free(list);
        let mut none = ptr::null_mut();
        assert_eq!(lv_multi_start(d, ptr::null(), 0, 1, 0, &mut none), LvStatus::InvalidArgument);
        lv_diagram_free(d);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(lv_diagram_parse(ptr::null(), &mut d), LvStatus::NullPointer);
        let text = CString::new("X[1,2,3]").unwrap();
        assert_eq!(lv_diagram_parse(text.as_ptr(), &mut d), LvStatus::Diagram);
        assert!(d.is_null());
        assert!(!last_error().is_empty());

        let good = parse(FIG8_PD);
        assert!(lv_last_error_message().is_null());
        let mut out = ptr::null_mut();
        let singular = [cx(1.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0)];
        let st = lv_representation_complete(good, [0usize].as_ptr(), singular.as_ptr(), 1, &mut out);
        assert_eq!(st, LvStatus::Representation);
        assert_eq!(lv_representation_complete(good, ptr::null(), ptr::null(), 1, &mut out), LvStatus::NullPointer);
        assert_eq!(lv_diagram_region_count(ptr::null()), 0);

        let mut v = LvComplex::default();
        assert_eq!(lv_dilog(cx(1.0, 0.0), ptr::null_mut()), LvStatus::NullPointer);
        assert_eq!(lv_dilog(cx(1.0, 0.0), &mut v), LvStatus::Ok);
        assert!((v.re - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);

        lv_diagram_free(good);
        lv_diagram_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(lv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/linkvol.h")
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "lv_diagram_parse",
        "lv_representation_complete",
        "lv_solution_from_coloring",
        "lv_volume",
        "lv_multi_start",
        "lv_last_error_message",
        "LV_STATUS_PANIC",
        "typedef struct LvDiagram LvDiagram",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c_and_cxx() {
    if !have_cc() {
        eprintln!("cc not found, skipping");
        return;
    }
    let dir = header().parent().unwrap().to_path_buf();
    let src = std::env::temp_dir().join(format!("linkvol_hdr_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"linkvol.h\"\nint main(void) { return lv_version() == 0; }\n").unwrap();
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(&dir)
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
    std::fs::remove_file(src).ok();
}
