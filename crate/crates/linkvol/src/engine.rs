//! Cross-ratio verification, Newton solving of the critical equations at
//! fixed meridian eigenvalues, and the end-to-end pipeline.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coloring::{random_generic_coloring, ColoringError, ColoringFile, RegionColoring};
use crate::diagram::LinkDiagram;
use crate::numerics::{to_pair, C64};
use crate::potential::{
    critical_residuals, crossing_ratios, is_nondegenerate, log_gradient, log_hessian, tau, w0, PotentialError,
    Solution, VolumeResult,
};
use crate::representation::{FillingSpec, Representation, RepresentationError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("singular Jacobian at iteration {0}")]
    Singular(usize),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("line search failed at iteration {0}")]
    LineSearch(usize),
    #[error("seed has {got} coordinates, diagram has {want} regions")]
    SeedDimension { got: usize, want: usize },
    #[error("converged to a collapsed point (ratio {0:.3e} near 0, 1 or infinity)")]
    Collapsed(C64),
    #[error("gluing check failed (max deviation {0:.3e})")]
    Gluing(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
}

/// Per crossing, the five shape parameters of the octahedron's tetrahedra.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossRatioSheet {
    pub crossings: Vec<[C64; 5]>,
}

pub fn cross_ratios(d: &LinkDiagram, s: &Solution) -> Result<CrossRatioSheet, PotentialError> {
    let report = is_nondegenerate(d, s);
    if let Some(&(crossing, ratio, _)) = report.failures.first() {
        return Err(PotentialError::Degenerate { crossing, ratio });
    }
    let crossings = d
        .crossings
        .iter()
        .map(|c| {
            let (wj, wk, wl, wm) = (s.w[c.j], s.w[c.k], s.w[c.l], s.w[c.m]);
            let (ma, mb) = (s.m[c.under_component], s.m[c.over_component]);
            if c.sign > 0 {
                [wm / (mb * wj), mb * wk / wl, wj * wl / (wm * wk), wk / (ma * wj), ma * wm / wl]
            } else {
                [wj / (ma * wk), ma * wl / wm, wm * wk / (wj * wl), wj / (mb * wm), mb * wl / wk]
            }
        })
        .collect();
    Ok(CrossRatioSheet { crossings })
}

impl CrossRatioSheet {
    /// Largest deviation from 1 of the two internal-edge products per octahedron.
    pub fn octahedron_deviation(&self) -> f64 {
        self.crossings
            .iter()
            .flat_map(|s| [s[0] * s[1] * s[2], s[3] * s[4] * s[2]])
            .map(|p| (p - 1.0).norm())
            .fold(0.0, f64::max)
    }

    /// Product around the over-edge of each over-arc.
    pub fn over_products(&self, d: &LinkDiagram) -> Vec<C64> {
        d.arcs
            .iter()
            .map(|arc| {
                let first = d.edge(arc.edges[0]);
                let s0 = &self.crossings[first.tail.0];
                let mut p = if d.crossings[first.tail.0].sign > 0 { s0[3] } else { s0[0] };
                for &e in &arc.edges {
                    let (hc, hp) = d.edge(e).head;
                    let s = &self.crossings[hc];
                    let pos = d.crossings[hc].sign > 0;
                    p *= match (hp, pos) {
                        (0, true) => s[4],
                        (0, false) => s[1],
                        (_, true) => 1.0 / (s[0] * s[1]),
                        (_, false) => 1.0 / (s[3] * s[4]),
                    };
                }
                p
            })
            .collect()
    }

    /// Product around the under-edge of each under-arc.
    pub fn under_products(&self, d: &LinkDiagram) -> Vec<C64> {
        d.crossings
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let out = if c.sign > 0 { 1 } else { 3 };
                let s0 = &self.crossings[ci];
                let mut p = if c.sign > 0 { s0[0] } else { s0[3] };
                let mut e = c.pd[out];
                loop {
                    let (hc, hp) = d.edge(e).head;
                    let s = &self.crossings[hc];
                    let pos = d.crossings[hc].sign > 0;
                    if hp != 0 {
                        p *= if pos { s[1] } else { s[4] };
                        break;
                    }
                    p *= if pos { 1.0 / (s[3] * s[4]) } else { 1.0 / (s[0] * s[1]) };
                    e = d.crossings[hc].pd[2];
                }
                p
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GluingReport {
    /// `∏_c τ_{c,j}` per region.
    #[serde(serialize_with = "ser_pairs")]
    pub regional: Vec<C64>,
    pub regional_max: f64,
    #[serde(serialize_with = "ser_pairs")]
    pub over: Vec<C64>,
    pub over_max: f64,
    #[serde(serialize_with = "ser_pairs")]
    pub under: Vec<C64>,
    pub under_max: f64,
    pub octahedron_max: f64,
}

fn ser_pairs<S: serde::Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&z| to_pair(z)))
}

fn max_dev(v: &[C64]) -> f64 {
    v.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max)
}

impl GluingReport {
    pub fn max(&self) -> f64 {
        self.regional_max.max(self.over_max).max(self.under_max).max(self.octahedron_max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn gluing_check(d: &LinkDiagram, s: &Solution) -> Result<GluingReport, PotentialError> {
    let sheet = cross_ratios(d, s)?;
    let regional = (0..d.n_regions)
        .map(|j| (0..d.crossings.len()).try_fold(C64::new(1.0, 0.0), |p, c| Ok(p * tau(d, c, j, s)?)))
        .collect::<Result<Vec<_>, PotentialError>>()?;
    let over = sheet.over_products(d);
    let under = sheet.under_products(d);
    Ok(GluingReport {
        regional_max: max_dev(&regional),
        over_max: max_dev(&over),
        under_max: max_dev(&under),
        octahedron_max: sheet.octahedron_deviation(),
        regional,
        over,
        under,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub seeds: usize,
    pub rng_seed: u64,
    pub damping: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { max_iterations: 50, residual_tol: 1e-10, seeds: 64, rng_seed: 0, damping: 1.0 }
    }
}

const COLLAPSE_TOL: f64 = 1e-6;
const RANK_TOL: f64 = 1e-10;

/// A ratio within `COLLAPSE_TOL` of 0, 1 or ∞, if any.
fn collapsed(d: &LinkDiagram, s: &Solution) -> Option<C64> {
    d.crossings.iter().flat_map(|c| crossing_ratios(d, c, s).values).find(|f| {
        let a = f.norm();
        a < COLLAPSE_TOL || a > 1.0 / COLLAPSE_TOL || (f - 1.0).norm() < COLLAPSE_TOL
    })
}

fn wrap(z: C64) -> C64 {
    C64::new(z.re, z.im - 2.0 * PI * (z.im / (2.0 * PI)).round())
}

fn residual(d: &LinkDiagram, s: &Solution) -> Result<DVector<C64>, PotentialError> {
    let g = log_gradient(d, s)?;
    Ok(DVector::from_iterator(d.n_regions - 1, g[..d.n_regions - 1].iter().map(|&z| wrap(z))))
}

fn exp_residual(f: &DVector<C64>) -> f64 {
    f.iter().map(|z| (z.exp() - 1.0).norm()).fold(0.0, f64::max)
}

fn sq(f: &DVector<C64>) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum()
}

/// Damped Newton on `w_j ∂W/∂w_j ≡ 0 (mod 2πi)` in log coordinates, the
/// last region value pinned to its seed. Steps are minimum-norm: the
/// solutions at fixed `m` form a family of dimension above one, so the
/// pinned Jacobian stays rank deficient.
pub fn newton_solve(d: &LinkDiagram, m: &[C64], seed: &[C64], cfg: &SolveConfig) -> Result<Solution, EngineError> {
    if seed.len() != d.n_regions {
        return Err(EngineError::SeedDimension { got: seed.len(), want: d.n_regions });
    }
    let n = d.n_regions;
    let mut s = Solution::new(d, seed.to_vec(), m.to_vec())?;
    let mut z: Vec<C64> = s.w.iter().map(|w| w.ln()).collect();
    let mut f = residual(d, &s)?;
    for it in 0..cfg.max_iterations {
        if exp_residual(&f) <= cfg.residual_tol {
            let report = is_nondegenerate(d, &s);
            if let Some(&(crossing, ratio, _)) = report.failures.first() {
                return Err(PotentialError::Degenerate { crossing, ratio }.into());
            }
            if let Some(f) = collapsed(d, &s) {
                return Err(EngineError::Collapsed(f));
            }
            return Ok(s);
        }
        let h = log_hessian(d, &s)?;
        let jac: DMatrix<C64> = h.view((0, 0), (n - 1, n - 1)).into_owned();
        if jac.iter().any(|x| !x.is_finite()) {
            return Err(EngineError::Singular(it));
        }
        let svd = jac.try_svd(true, true, f64::EPSILON, 1000).ok_or(EngineError::Singular(it))?;
        let cutoff = RANK_TOL * svd.singular_values.max();
        let step = svd.solve(&(-&f), cutoff).map_err(|_| EngineError::Singular(it))?;
        if step.iter().any(|x| !x.is_finite()) {
            return Err(EngineError::Singular(it));
        }
        let f0 = sq(&f);
        let mut lambda = cfg.damping;
        loop {
            let trial: Vec<C64> =
                z.iter().enumerate().map(|(k, &zk)| if k < n - 1 { zk + lambda * step[k] } else { zk }).collect();
            let cand = Solution::new(d, trial.iter().map(|t| t.exp()).collect(), m.to_vec());
            if let Ok(cand) = cand {
                if is_nondegenerate(d, &cand).is_ok() {
                    if let Ok(fc) = residual(d, &cand) {
                        if sq(&fc) <= (1.0 - 1e-4 * lambda) * f0 {
                            z = trial;
                            s = cand;
                            f = fc;
                            break;
                        }
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-8 {
                return Err(EngineError::LineSearch(it));
            }
        }
    }
    if exp_residual(&f) <= cfg.residual_tol && is_nondegenerate(d, &s).is_ok() && collapsed(d, &s).is_none() {
        return Ok(s);
    }
    Err(EngineError::NoConvergence { iterations: cfg.max_iterations, residual: exp_residual(&f) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Found {
    pub seed_index: usize,
    pub solution: Solution,
    pub result: VolumeResult,
}

/// Newton from `cfg.seeds` random starting points; distinct solutions
/// (compared after scaling the last coordinate to 1) sorted by `Im W0`
/// descending, unfilled.
pub fn multi_start(d: &LinkDiagram, m: &[C64], cfg: &SolveConfig) -> Vec<Found> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let unfilled = FillingSpec::unfilled(d.n_components());
    let mut found: Vec<Found> = Vec::new();
    let mut normalized: Vec<Vec<C64>> = Vec::new();
    for seed_index in 0..cfg.seeds {
        let seed: Vec<C64> =
            (0..d.n_regions).map(|_| C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-PI..PI))).collect();
        let Ok(sol) = newton_solve(d, m, &seed, cfg) else { continue };
        let last = sol.w[d.n_regions - 1];
        let norm: Vec<C64> = sol.w.iter().map(|w| w / last).collect();
        if normalized.iter().any(|o| o.iter().zip(&norm).all(|(a, b)| (a - b).norm() <= 1e-6 * b.norm().max(1.0))) {
            continue;
        }
        let Ok(result) = w0(d, &sol, &unfilled) else { continue };
        normalized.push(norm);
        found.push(Found { seed_index, solution: sol, result });
    }
    found.sort_by(|a, b| b.result.vol.total_cmp(&a.result.vol).then(a.seed_index.cmp(&b.seed_index)));
    found
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolCs {
    pub result: VolumeResult,
    pub gluing: GluingReport,
}

/// `W0` with the gluing report attached; the gluing identities must hold to `tol`.
pub fn vol_cs(d: &LinkDiagram, s: &Solution, f: &FillingSpec, tol: f64) -> Result<VolCs, EngineError> {
    let gluing = gluing_check(d, s)?;
    if !gluing.passed(tol) {
        return Err(EngineError::Gluing(gluing.max()));
    }
    let result = w0(d, s, f)?;
    Ok(VolCs { result, gluing })
}

/// How to color the regions for [`volume_from_representation`].
#[derive(Debug, Clone, PartialEq)]
pub enum ColoringChoice {
    Pinned(ColoringFile),
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub coloring: RegionColoring,
    pub filling: FillingSpec,
    pub solution: Solution,
    pub residual_max: f64,
    pub vol_cs: VolCs,
}

/// Representation → coloring → solution → `W0`, deriving `l_i` and
/// `(u_i, v_i)` from `ρ` where the filling leaves them open.
pub fn volume_from_representation(
    d: &LinkDiagram,
    rho: &Representation,
    filling: &FillingSpec,
    coloring: &ColoringChoice,
) -> Result<PipelineReport, EngineError> {
    let mut filling = filling.clone();
    filling.complete_from(d, rho)?;
    let coloring = match coloring {
        ColoringChoice::Pinned(f) => f.apply(d, rho)?,
        ColoringChoice::Random(seed) => random_generic_coloring(d, rho, *seed)?,
    };
    let solution = coloring.assemble_solution(d, rho)?;
    let residual_max = critical_residuals(d, &solution)?.max();
    let vol_cs = vol_cs(d, &solution, &filling, 1e-6)?;
    Ok(PipelineReport { coloring, filling, solution, residual_max, vol_cs })
}
