//! Region colorings: one 2-vector per region, transported across each arc
//! by its Wirtinger generator, plus an auxiliary vector `W`. The induced
//! point has `w_j = det(W, V_j)`.
//!
//! Transport rule: for an edge with left region `L` and right region `R`
//! (looking along the orientation), `V_R = ρ(g)⁻¹ V_L`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::LinkDiagram;
use crate::numerics::{from_pair, to_pair, C64};
use crate::potential::Solution;
use crate::representation::{Representation, RepresentationError};

pub type Vec2 = [C64; 2];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ColoringError {
    #[error("seed vector is zero")]
    ZeroSeed,
    #[error("seed region {0} out of range")]
    SeedRegion(usize),
    #[error("representation/transport convention mismatch (cycle residual {0:.3e})")]
    Inconsistent(f64),
    #[error("coloring is not generic: {0}")]
    Degenerate(String),
    #[error("no generic coloring found after {0} attempts")]
    Exhausted(usize),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error("invalid coloring JSON: {0}")]
    Json(String),
}

const TRANSPORT_TOL: f64 = 1e-9;
const GENERIC_TOL: f64 = 1e-8;
const MAX_ATTEMPTS: usize = 1000;

pub fn det(a: Vec2, b: Vec2) -> C64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(v: Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionColoring {
    pub v: Vec<Vec2>,
    pub w: Option<Vec2>,
    pub seed_region: usize,
}

/// Transport `seed` from `seed_region` to every region.
pub fn propagate(
    d: &LinkDiagram,
    rho: &Representation,
    seed_region: usize,
    seed: Vec2,
) -> Result<RegionColoring, ColoringError> {
    if seed_region >= d.n_regions {
        return Err(ColoringError::SeedRegion(seed_region));
    }
    if norm(seed) == 0.0 {
        return Err(ColoringError::ZeroSeed);
    }
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); d.n_regions];
    for e in d.edges() {
        adj[e.left].push((e.right, e.arc, true));
        adj[e.right].push((e.left, e.arc, false));
    }
    let mut v: Vec<Option<Vec2>> = vec![None; d.n_regions];
    v[seed_region] = Some(seed);
    let mut queue = VecDeque::from([seed_region]);
    while let Some(r) = queue.pop_front() {
        let cur = v[r].expect("queued regions are colored");
        for &(s, arc, left_to_right) in &adj[r] {
            if v[s].is_some() {
                continue;
            }
            let g = rho.generator(arc);
            v[s] = Some(if left_to_right { g.inverse().apply(cur) } else { g.apply(cur) });
            queue.push_back(s);
        }
    }
    let v: Vec<Vec2> = v.into_iter().collect::<Option<_>>().ok_or(ColoringError::Inconsistent(f64::INFINITY))?;
    let col = RegionColoring { v, w: None, seed_region };
    let res = col.transport_residual(d, rho);
    if !(res <= TRANSPORT_TOL) {
        return Err(ColoringError::Inconsistent(res));
    }
    Ok(col)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `det(W, V_j) = 0`
    DetZero { region: usize },
    /// `W` is an eigenvector of the generator
    WEigenvector { generator: usize },
    /// `V_j` is an eigenvector of the generator
    VEigenvector { region: usize, generator: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DetZero { region } => write!(f, "(i) det(W, V_{region}) = 0"),
            Violation::WEigenvector { generator } => write!(f, "(ii) W is an eigenvector of g{}", generator + 1),
            Violation::VEigenvector { region, generator } => {
                write!(f, "(iii) V_{region} is an eigenvector of g{}", generator + 1)
            }
        }
    }
}

fn is_eigenvector(g: &crate::representation::Mat2, x: Vec2) -> bool {
    let gx = g.apply(x);
    det(x, gx).norm() <= GENERIC_TOL * norm(x) * norm(gx)
}

impl RegionColoring {
    pub fn with_w(mut self, w: Vec2) -> Self {
        self.w = Some(w);
        self
    }

    /// Largest relative violation of the transport rule over all edges.
    pub fn transport_residual(&self, d: &LinkDiagram, rho: &Representation) -> f64 {
        d.edges()
            .map(|e| {
                let g = rho.generator(e.arc);
                let want = g.inverse().apply(self.v[e.left]);
                let diff = [self.v[e.right][0] - want[0], self.v[e.right][1] - want[1]];
                norm(diff) / norm(self.v[e.right]).max(norm(want)).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    /// Violated genericity conditions; empty means generic.
    pub fn check_genericity(&self, rho: &Representation) -> Vec<Violation> {
        let mut out = Vec::new();
        let Some(w) = self.w else {
            return vec![Violation::DetZero { region: 0 }];
        };
        for (j, &vj) in self.v.iter().enumerate() {
            if det(w, vj).norm() <= GENERIC_TOL * norm(w) * norm(vj) {
                out.push(Violation::DetZero { region: j });
            }
        }
        for (g, m) in rho.matrices().iter().enumerate() {
            if is_eigenvector(m, w) {
                out.push(Violation::WEigenvector { generator: g });
            }
        }
        for (j, &vj) in self.v.iter().enumerate() {
            for (g, m) in rho.matrices().iter().enumerate() {
                if is_eigenvector(m, vj) {
                    out.push(Violation::VEigenvector { region: j, generator: g });
                }
            }
        }
        out
    }

    /// The point `w_j = det(W, V_j)` with meridian eigenvalues of `ρ`.
    pub fn assemble_solution(&self, d: &LinkDiagram, rho: &Representation) -> Result<Solution, ColoringError> {
        let report = self.check_genericity(rho);
        if !report.is_empty() {
            let text: Vec<String> = report.iter().map(ToString::to_string).collect();
            return Err(ColoringError::Degenerate(format!("{}; retry with another seed vector or W", text.join(", "))));
        }
        let w = self.w.expect("checked by genericity");
        let ws = self.v.iter().map(|&vj| det(w, vj)).collect();
        let ms = (0..d.n_components()).map(|i| rho.meridian_eigenvalue(d, i)).collect::<Result<_, _>>()?;
        Ok(Solution::new(d, ws, ms).expect("generic colorings give nonzero coordinates"))
    }
}

fn grid_point<R: Rng>(rng: &mut R) -> C64 {
    loop {
        let z = C64::new(rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64);
        if z.norm_sqr() > 0.0 {
            return z;
        }
    }
}

/// Sample seed vector (at region 0) and `W` from the small Gaussian-integer
/// grid until the coloring is generic.
pub fn random_generic_coloring(
    d: &LinkDiagram,
    rho: &Representation,
    rng_seed: u64,
) -> Result<RegionColoring, ColoringError> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..MAX_ATTEMPTS {
        let seed = [grid_point(&mut rng), grid_point(&mut rng)];
        let w = [grid_point(&mut rng), grid_point(&mut rng)];
        let col = propagate(d, rho, 0, seed)?.with_w(w);
        if col.check_genericity(rho).is_empty() {
            return Ok(col);
        }
    }
    Err(ColoringError::Exhausted(MAX_ATTEMPTS))
}

/// Coloring file: `{"seedV": [[re,im],[re,im]], "W": [[re,im],[re,im]], "seed_region": k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringFile {
    #[serde(rename = "seedV")]
    pub seed_v: [[f64; 2]; 2],
    #[serde(rename = "W")]
    pub w: [[f64; 2]; 2],
    #[serde(default)]
    pub seed_region: usize,
}

impl ColoringFile {
    pub fn from_json(text: &str) -> Result<Self, ColoringError> {
        serde_json::from_str(text).map_err(|e| ColoringError::Json(e.to_string()))
    }

    pub fn new(seed_region: usize, seed_v: Vec2, w: Vec2) -> Self {
        ColoringFile { seed_v: seed_v.map(to_pair), w: w.map(to_pair), seed_region }
    }

    pub fn seed(&self) -> Vec2 {
        self.seed_v.map(from_pair)
    }

    pub fn w_vec(&self) -> Vec2 {
        self.w.map(from_pair)
    }

    pub fn apply(&self, d: &LinkDiagram, rho: &Representation) -> Result<RegionColoring, ColoringError> {
        Ok(propagate(d, rho, self.seed_region, self.seed())?.with_w(self.w_vec()))
    }
}
