#![allow(dead_code)]

use std::collections::BTreeMap;

use linkvol::coloring::ColoringFile;
use linkvol::diagram::{load_diagram, LinkDiagram};
use linkvol::potential::Solution;
use linkvol::representation::{complete_representation, FillingFile, FillingSpec, Mat2, Representation};
use linkvol::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIG8_PD: &str = include_str!("../../data/figure8.pd");
pub const TREFOIL_PD: &str = include_str!("../../data/trefoil.pd");
pub const WH_PD: &str = include_str!("../../data/whitehead.pd");
pub const FIG8_FILLING: &str = include_str!("../../data/figure8_filling.json");
pub const WH_FILLING: &str = include_str!("../../data/whitehead_filling.json");

pub const FIG8_M: C64 = C64::new(-1.3066423495115913, 0.049875830231792866);
pub const WH_M1: C64 = C64::new(0.6043082979380546, 1.3591677854323294);
pub const WH_M2: C64 = C64::new(1.4324890480784587, 1.08046977265233);
pub const WH_Y: C64 = C64::new(1.3498703134332404, -2.797209203157619);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn figure8() -> LinkDiagram {
    load_diagram(FIG8_PD).unwrap()
}

pub fn trefoil() -> LinkDiagram {
    load_diagram(TREFOIL_PD).unwrap()
}

pub fn whitehead() -> LinkDiagram {
    load_diagram(WH_PD).unwrap()
}

/// `y` for the figure-eight representation with the `+` square root.
pub fn figure8_y(m: C64) -> C64 {
    let m2 = m * m;
    let disc = m2.powi(4) - 2.0 * m2.powi(3) - m2.powi(2) - 2.0 * m2 + 1.0;
    (-m2 * m2 + 3.0 * m2 - 1.0 + disc.sqrt()) / (2.0 * m2)
}

/// Coefficients of the cubic in `y`, constant term first.
pub fn whitehead_cubic(m1: C64, m2: C64) -> [C64; 4] {
    let (a, b) = (m1 * m1, m2 * m2);
    [
        m1 * m2 * (a - 1.0) * (b - 1.0),
        (a * b + 1.0) * (a - 1.0) * (b - 1.0) + 2.0 * a * b,
        (2.0 - a - b + 2.0 * a * b) * m1 * m2,
        a * b,
    ]
}

pub fn upper(m: C64) -> Mat2 {
    Mat2::new(m, c(1.0, 0.0), c(0.0, 0.0), 1.0 / m)
}

pub fn lower(m: C64, y: C64) -> Mat2 {
    Mat2::new(m, c(0.0, 0.0), y, 1.0 / m)
}

pub fn figure8_rep(d: &LinkDiagram, m: C64) -> Representation {
    let gens = BTreeMap::from([(0, upper(m)), (1, lower(m, figure8_y(m)))]);
    complete_representation(d, &gens).unwrap()
}

pub fn whitehead_rep(d: &LinkDiagram, m1: C64, m2: C64, y: C64) -> Representation {
    let gens = BTreeMap::from([(0, upper(m1)), (2, lower(m2, y))]);
    complete_representation(d, &gens).unwrap()
}

/// Seed `(1, i)` in region 1, auxiliary vector `(2, 1)`.
pub fn standard_coloring() -> ColoringFile {
    ColoringFile::new(1, [c(1.0, 0.0), c(0.0, 1.0)], [c(2.0, 0.0), c(1.0, 0.0)])
}

pub fn filling(text: &str) -> FillingSpec {
    FillingFile::from_json(text).unwrap().to_spec().unwrap()
}

pub fn random_point(d: &LinkDiagram, rng: &mut ChaCha8Rng) -> Solution {
    let w =
        (0..d.n_regions).map(|_| C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-3.1..3.1))).collect();
    let m = (0..d.n_components())
        .map(|_| C64::from_polar(rng.random_range(0.7..1.4), rng.random_range(-3.1..3.1)))
        .collect();
    Solution::new(d, w, m).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol
}
