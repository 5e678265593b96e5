mod common;

use std::collections::BTreeMap;

use common::*;
use linkvol::diagram::Word;
use linkvol::representation::{
    complete_representation, filling_residual, solve_uv, FillingFile, Mat2, Representation, RepresentationError,
    RepresentationFile, Slope,
};
use linkvol::C64;
use rand::Rng;

fn figure8_l(m: C64) -> C64 {
    let m2 = m * m;
    let disc = m2.powi(4) - 2.0 * m2.powi(3) - m2.powi(2) - 2.0 * m2 + 1.0;
    (m2.powi(4) - m2.powi(3) - 2.0 * m2 * m2 - m2 + 1.0 + (m2 * m2 - 1.0) * disc.sqrt()) / (2.0 * m2 * m2)
}

#[test]
fn figure8_completion_satisfies_relations() {
    let d = figure8();
    let rho = figure8_rep(&d, FIG8_M);
    assert_eq!(rho.matrices().len(), 4);
    assert!(rho.relation_residual(&d) < 1e-12);
    for g in rho.matrices() {
        assert!(close(g.det(), c(1.0, 0.0), 1e-12));
        assert!(close(g.trace(), FIG8_M + 1.0 / FIG8_M, 1e-12));
    }
}

#[test]
fn figure8_eigenvalues() {
    let d = figure8();
    let rho = figure8_rep(&d, FIG8_M);
    let m = rho.meridian_eigenvalue(&d, 0).unwrap();
    assert!(close(m, c(-1.30664, 0.04987), 1e-5));
    let l = rho.longitude_eigenvalue(&d, 0).unwrap();
    assert!(close(l, c(-0.43642, 0.71337), 1e-5), "{l}");
    let closed = figure8_l(FIG8_M);
    assert!(close(l, closed, 1e-9) || close(l, 1.0 / closed, 1e-9), "{l} vs {closed}");
    // 2/3 filling
    assert!((m * m * l.powi(3) - 1.0).norm() < 1e-9);
}

#[test]
fn whitehead_from_cubic_root() {
    let d = whitehead();
    let rho = whitehead_rep(&d, WH_M1, WH_M2, WH_Y);
    assert!(rho.relation_residual(&d) < 1e-10);
    assert!(close(rho.meridian_eigenvalue(&d, 0).unwrap(), c(0.60430, 1.35917), 1e-5));
    assert!(close(rho.meridian_eigenvalue(&d, 1).unwrap(), c(1.43249, 1.08047), 1e-5));
    assert!(close(rho.longitude_eigenvalue(&d, 1).unwrap(), c(-4.30814, -0.19296), 1e-4));
}

#[test]
fn whitehead_other_y_is_rejected() {
    let d = whitehead();
    let gens = BTreeMap::from([(0, upper(WH_M1)), (2, lower(WH_M2, WH_Y + 0.1))]);
    assert!(matches!(complete_representation(&d, &gens), Err(RepresentationError::RelationsInconsistent(_))));
}

#[test]
fn trefoil_parabolic() {
    let d = trefoil();
    let one = c(1.0, 0.0);
    let gens = BTreeMap::from([(0, upper(one)), (1, lower(one, c(-1.0, 0.0)))]);
    let rho = complete_representation(&d, &gens).unwrap();
    assert!(rho.is_parabolic(&d, 0).unwrap());
    let l = rho.longitude_eigenvalue(&d, 0).unwrap();
    assert!(close(l, one, 1e-12) || close(l, -one, 1e-12), "{l}");
}

#[test]
fn trivial_meridian_rejected() {
    let d = figure8();
    let e = Representation::new(&d, vec![Mat2::identity(); 4]).unwrap_err();
    assert!(matches!(e, RepresentationError::TrivialMeridian(0)));
}

#[test]
fn non_unimodular_rejected() {
    let d = figure8();
    let mut gens = BTreeMap::new();
    gens.insert(0, Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
    gens.insert(1, upper(c(2.0, 0.0)));
    assert!(matches!(complete_representation(&d, &gens), Err(RepresentationError::NotUnimodular { .. })));
}

#[test]
fn words() {
    let d = figure8();
    let rho = figure8_rep(&d, FIG8_M);
    assert_eq!(rho.evaluate_word(&Word::default()), Mat2::identity());
    let g = rho.evaluate_word(&Word(vec![(2, 1), (2, -1)]));
    assert!(g.max_abs_diff(&Mat2::identity()) < 1e-12);
}

#[test]
fn longitude_trace_is_conjugation_invariant() {
    let d = whitehead();
    let rho = whitehead_rep(&d, WH_M1, WH_M2, WH_Y);
    let mut rng = rng(3);
    for _ in 0..10 {
        let mut p = Mat2::new(
            c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
        );
        let s = p.det().sqrt();
        p = Mat2::new(p.a / s, p.b / s, p.c / s, p.d / s);
        let q = p.inverse();
        let conj = Representation::new(&d, rho.matrices().iter().map(|&g| p * g * q).collect()).unwrap();
        for i in 0..2 {
            let w = d.longitude_word(i).unwrap();
            let t0 = rho.evaluate_word(&w).trace();
            let t1 = conj.evaluate_word(&w).trace();
            assert!((t0 - t1).norm() <= 1e-8 * (1.0 + t0.norm()));
            let m0 = rho.meridian_eigenvalue(&d, i).unwrap();
            let m1 = conj.meridian_eigenvalue(&d, i).unwrap();
            assert!(close(m0, m1, 1e-8) || close(m0, 1.0 / m1, 1e-8));
        }
    }
}

#[test]
fn uv_examples() {
    let d = figure8();
    let rho = figure8_rep(&d, FIG8_M);
    let l = rho.longitude_eigenvalue(&d, 0).unwrap();
    assert_eq!(solve_uv(FIG8_M, l, 2, 3).unwrap(), (-2, 0));
    assert!(filling_residual(FIG8_M, l, 2, 3, -2, 0).norm() < 1e-9);

    let d = whitehead();
    let rho = whitehead_rep(&d, WH_M1, WH_M2, WH_Y);
    let l1 = rho.longitude_eigenvalue(&d, 0).unwrap();
    let l2 = rho.longitude_eigenvalue(&d, 1).unwrap();
    assert_eq!(solve_uv(WH_M1, l1, -5, 1).unwrap(), (0, 2));
    assert_eq!(solve_uv(WH_M2, l2, -5, 2).unwrap(), (-1, -1));

    assert_eq!(solve_uv(c(1.0, 0.0), c(1.0, 0.0), 7, 3).unwrap(), (0, 0));
    assert!(matches!(solve_uv(c(1.0, 0.0), c(1.0, 0.0), 2, 4), Err(RepresentationError::NotCoprime { .. })));
    assert!(matches!(solve_uv(c(1.3, 0.2), c(1.0, 0.0), 2, 3), Err(RepresentationError::NotFillingPair(_))));
}

#[test]
fn filling_spec_completion() {
    let d = whitehead();
    let rho = whitehead_rep(&d, WH_M1, WH_M2, WH_Y);
    let mut spec = FillingFile::from_json(r#"{"slopes": [[-5, 1], [5, -2]]}"#).unwrap().to_spec().unwrap();
    assert_eq!(spec.components[1].slope, Slope::Finite { r: -5, s: 2 });
    spec.complete_from(&d, &rho).unwrap();
    assert_eq!(spec.components[0].uv, Some((0, 2)));
    assert_eq!(spec.components[1].uv, Some((-1, -1)));
    let m = [WH_M1, WH_M2];
    spec.validate(&m).unwrap();

    let mut wrong = spec.clone();
    wrong.components[0].uv = Some((1, 2));
    assert!(matches!(wrong.validate(&m), Err(RepresentationError::FillingResidual { .. })));

    let mut unfilled = FillingFile::from_json(r#"{"slopes": ["inf", "inf"]}"#).unwrap().to_spec().unwrap();
    assert!(unfilled.validate(&m).is_ok());
    assert!(matches!(unfilled.complete_from(&d, &rho), Err(RepresentationError::NotParabolic { component: 0 })));
}

#[test]
fn representation_file_round_trip() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/whitehead_rep.json")).unwrap();
    let partial = RepresentationFile::from_json(&text).unwrap().partial().unwrap();
    assert_eq!(partial.keys().copied().collect::<Vec<_>>(), [0, 2]);
    let d = whitehead();
    let rho = complete_representation(&d, &partial).unwrap();
    let reference = whitehead_rep(&d, WH_M1, WH_M2, WH_Y);
    for (a, b) in rho.matrices().iter().zip(reference.matrices()) {
        assert!(a.max_abs_diff(b) < 1e-9);
    }
    assert!(RepresentationFile::from_json(r#"{"generators": {"x1": []}}"#).is_err());
}
