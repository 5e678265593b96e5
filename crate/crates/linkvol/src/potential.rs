//! The potential function: a sum over crossings of five dilogarithms, a
//! constant and a log·log term, its logarithmic derivatives, closed-form
//! τ-values and the filling-corrected value `W0`.
//!
//! Variables are indexed `0..n` for regions and `n..n+h` for components.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::diagram::{Crossing, LinkDiagram};
use crate::numerics::{from_pair, li2, plog, reduce_mod_pi2, to_pair, C64, PI2};
use crate::representation::{FillingSpec, RepresentationError, Slope};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PotentialError {
    #[error("solution has {got} {what}, diagram needs {want}")]
    Dimension { what: &'static str, got: usize, want: usize },
    #[error("solution coordinate {0} is zero or non-finite")]
    BadCoordinate(usize),
    #[error("degenerate crossing {crossing}: ratio {ratio} equals 1")]
    Degenerate { crossing: usize, ratio: usize },
    #[error("meridional filling (s = 0) on component {0} is unsupported")]
    MeridionalFilling(usize),
    #[error("filling lacks (u, v) for component {0}")]
    MissingUv(usize),
    #[error("point is not a solution (max residual {0:.3e})")]
    NotASolution(f64),
    #[error(transparent)]
    Filling(#[from] RepresentationError),
    #[error("invalid solution JSON: {0}")]
    Json(String),
}

const ZETA2: f64 = PI2 / 6.0;
const DEGENERACY_TOL: f64 = 1e-8;
const SOLUTION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub w: Vec<C64>,
    pub m: Vec<C64>,
}

impl Solution {
    pub fn new(d: &LinkDiagram, w: Vec<C64>, m: Vec<C64>) -> Result<Self, PotentialError> {
        if w.len() != d.n_regions {
            return Err(PotentialError::Dimension { what: "region values", got: w.len(), want: d.n_regions });
        }
        if m.len() != d.n_components() {
            return Err(PotentialError::Dimension { what: "meridian values", got: m.len(), want: d.n_components() });
        }
        if let Some(i) = w.iter().chain(&m).position(|z| z.norm_sqr() == 0.0 || !z.is_finite()) {
            return Err(PotentialError::BadCoordinate(i));
        }
        Ok(Solution { w, m })
    }

    pub fn var(&self, k: usize) -> C64 {
        if k < self.w.len() {
            self.w[k]
        } else {
            self.m[k - self.w.len()]
        }
    }

    pub fn n_vars(&self) -> usize {
        self.w.len() + self.m.len()
    }

    pub fn conj(&self) -> Solution {
        Solution { w: self.w.iter().map(|z| z.conj()).collect(), m: self.m.iter().map(|z| z.conj()).collect() }
    }

    /// Same point with every `w_j` multiplied by `c`.
    pub fn rescaled(&self, c: C64) -> Solution {
        Solution { w: self.w.iter().map(|z| z * c).collect(), m: self.m.clone() }
    }

    pub fn to_file(&self) -> SolutionFile {
        SolutionFile {
            w: self.w.iter().map(|&z| to_pair(z)).collect(),
            m: self.m.iter().map(|&z| to_pair(z)).collect(),
        }
    }
}

/// Solution file: `{"w": [[re,im],...], "m": [[re,im],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub w: Vec<[f64; 2]>,
    pub m: Vec<[f64; 2]>,
}

impl SolutionFile {
    pub fn from_json(text: &str) -> Result<Self, PotentialError> {
        serde_json::from_str(text).map_err(|e| PotentialError::Json(e.to_string()))
    }

    pub fn to_solution(&self, d: &LinkDiagram) -> Result<Solution, PotentialError> {
        Solution::new(d, self.w.iter().map(|&p| from_pair(p)).collect(), self.m.iter().map(|&p| from_pair(p)).collect())
    }
}

/// Sparse exponent vector of a monomial in the variables.
pub type Exponents = Vec<(usize, i32)>;

fn monomial(pairs: &[(usize, i32)]) -> Exponents {
    let mut out: Exponents = Vec::with_capacity(pairs.len());
    for &(k, e) in pairs {
        match out.iter_mut().find(|(v, _)| *v == k) {
            Some(slot) => slot.1 += e,
            None => out.push((k, e)),
        }
    }
    out.retain(|&(_, e)| e != 0);
    out
}

/// The five ratios at one crossing with their exponent vectors.
#[derive(Debug, Clone)]
pub struct CrossingRatios {
    pub positive: bool,
    pub values: [C64; 5],
    pub exponents: [Exponents; 5],
}

const COEF_POS: [f64; 5] = [1.0, 1.0, -1.0, -1.0, 1.0];

impl CrossingRatios {
    fn coef(&self) -> ([f64; 5], f64, f64) {
        if self.positive {
            (COEF_POS, -ZETA2, 1.0)
        } else {
            (COEF_POS.map(|c| -c), ZETA2, -1.0)
        }
    }
}

pub fn crossing_ratios(d: &LinkDiagram, c: &Crossing, s: &Solution) -> CrossingRatios {
    let n = d.n_regions;
    let (j, k, l, m) = (c.j, c.k, c.l, c.m);
    let (a, b) = (n + c.under_component, n + c.over_component);
    let (wj, wk, wl, wm) = (s.w[j], s.w[k], s.w[l], s.w[m]);
    let (ma, mb) = (s.m[c.under_component], s.m[c.over_component]);
    let e = if c.sign > 0 { -1 } else { 1 };
    let values = if c.sign > 0 {
        [wm / (mb * wj), wk / (ma * wj), wl / (mb * wk), wl / (ma * wm), wj * wl / (wm * wk)]
    } else {
        [mb * wm / wj, ma * wk / wj, mb * wl / wk, ma * wl / wm, wj * wl / (wk * wm)]
    };
    let exponents = [
        monomial(&[(m, 1), (j, -1), (b, e)]),
        monomial(&[(k, 1), (j, -1), (a, e)]),
        monomial(&[(l, 1), (k, -1), (b, e)]),
        monomial(&[(l, 1), (m, -1), (a, e)]),
        monomial(&[(j, 1), (l, 1), (m, -1), (k, -1)]),
    ];
    CrossingRatios { positive: c.sign > 0, values, exponents }
}

/// Contribution of one crossing.
pub fn crossing_potential(d: &LinkDiagram, crossing: usize, s: &Solution) -> C64 {
    let r = crossing_ratios(d, &d.crossings[crossing], s);
    let (coef, constant, logsign) = r.coef();
    let mut acc = C64::new(constant, 0.0);
    for (c, &f) in coef.iter().zip(&r.values) {
        acc += *c * li2(f);
    }
    acc + logsign * plog(r.values[0]) * plog(r.values[1])
}

pub fn total_potential(d: &LinkDiagram, s: &Solution) -> C64 {
    (0..d.crossings.len()).map(|c| crossing_potential(d, c, s)).sum()
}

/// `x_k ∂W_c/∂x_k` for every variable `x_k`, at one crossing.
pub fn crossing_log_gradient(d: &LinkDiagram, crossing: usize, s: &Solution) -> Result<Vec<C64>, PotentialError> {
    let r = crossing_ratios(d, &d.crossings[crossing], s);
    let (coef, _, logsign) = r.coef();
    let mut g = vec![C64::new(0.0, 0.0); s.n_vars()];
    for (q, (&c, f)) in coef.iter().zip(&r.values).enumerate() {
        if (f - 1.0).norm_sqr() == 0.0 {
            return Err(PotentialError::Degenerate { crossing, ratio: q });
        }
        let t = -c * plog(1.0 - f);
        for &(k, e) in &r.exponents[q] {
            g[k] += t * e as f64;
        }
    }
    let (l0, l1) = (plog(r.values[0]), plog(r.values[1]));
    for &(k, e) in &r.exponents[0] {
        g[k] += logsign * e as f64 * l1;
    }
    for &(k, e) in &r.exponents[1] {
        g[k] += logsign * e as f64 * l0;
    }
    Ok(g)
}

/// Logarithmic gradient of the total potential, regions then components.
pub fn log_gradient(d: &LinkDiagram, s: &Solution) -> Result<Vec<C64>, PotentialError> {
    let mut g = vec![C64::new(0.0, 0.0); s.n_vars()];
    for c in 0..d.crossings.len() {
        for (acc, x) in g.iter_mut().zip(crossing_log_gradient(d, c, s)?) {
            *acc += x;
        }
    }
    Ok(g)
}

/// `w_j ∂W/∂w_j` for every region.
pub fn wdw(d: &LinkDiagram, s: &Solution) -> Result<Vec<C64>, PotentialError> {
    let mut g = log_gradient(d, s)?;
    g.truncate(d.n_regions);
    Ok(g)
}

/// `m_i ∂W/∂m_i` for every component.
pub fn mdw(d: &LinkDiagram, s: &Solution) -> Result<Vec<C64>, PotentialError> {
    Ok(log_gradient(d, s)?.split_off(d.n_regions))
}

/// Second derivatives in the log coordinates `log x_k`.
pub fn log_hessian(d: &LinkDiagram, s: &Solution) -> Result<DMatrix<C64>, PotentialError> {
    let nv = s.n_vars();
    let mut h = DMatrix::from_element(nv, nv, C64::new(0.0, 0.0));
    for (ci, c) in d.crossings.iter().enumerate() {
        let r = crossing_ratios(d, c, s);
        let (coef, _, logsign) = r.coef();
        for (q, (&cq, &f)) in coef.iter().zip(&r.values).enumerate() {
            let one_minus = 1.0 - f;
            if one_minus.norm_sqr() == 0.0 {
                return Err(PotentialError::Degenerate { crossing: ci, ratio: q });
            }
            let t = cq * f / one_minus;
            for &(a, ea) in &r.exponents[q] {
                for &(b, eb) in &r.exponents[q] {
                    h[(a, b)] += t * (ea * eb) as f64;
                }
            }
        }
        for &(a, ea) in &r.exponents[0] {
            for &(b, eb) in &r.exponents[1] {
                let t = C64::new(logsign * (ea * eb) as f64, 0.0);
                h[(a, b)] += t;
                h[(b, a)] += t;
            }
        }
    }
    Ok(h)
}

/// Closed-form `τ` for each slot `(j, k, l, m)` of a crossing.
fn slot_taus(c: &Crossing, s: &Solution) -> [C64; 4] {
    let (wj, wk, wl, wm) = (s.w[c.j], s.w[c.k], s.w[c.l], s.w[c.m]);
    let (ma, mb) = (s.m[c.under_component], s.m[c.over_component]);
    if c.sign > 0 {
        [
            (ma * wj - wk) * (mb * wj - wm) / (wk * wm - wj * wl),
            (wj * wl - wk * wm) / ((wk / ma - wj) * (mb * wk - wl)),
            (wl / mb - wk) * (wl / ma - wm) / (wk * wm - wj * wl),
            (wj * wl - wk * wm) / ((wm / mb - wj) * (ma * wm - wl)),
        ]
    } else {
        [
            (wk * wm - wj * wl) / ((wj / ma - wk) * (wj / mb - wm)),
            (ma * wk - wj) * (wk / mb - wl) / (wj * wl - wk * wm),
            (wk * wm - wj * wl) / ((mb * wl - wk) * (ma * wl - wm)),
            (mb * wm - wj) * (wm / ma - wl) / (wj * wl - wk * wm),
        ]
    }
}

/// `τ_{c,j} = exp(w_j ∂W_c/∂w_j)` by its rational closed form; `1` when the
/// region does not touch the crossing.
pub fn tau(d: &LinkDiagram, crossing: usize, region: usize, s: &Solution) -> Result<C64, PotentialError> {
    let c = &d.crossings[crossing];
    let t = slot_taus(c, s);
    let mut acc = C64::new(1.0, 0.0);
    for (slot, &r) in c.slots().iter().enumerate() {
        if r == region {
            acc *= t[slot];
        }
    }
    if !acc.is_finite() || acc.norm_sqr() == 0.0 {
        return Err(PotentialError::Degenerate { crossing, ratio: 4 });
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    /// `(crossing, ratio index, value)` for every ratio within tolerance of 1.
    pub failures: Vec<(usize, usize, C64)>,
}

impl DegeneracyReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Each of the five ratios at every crossing must be finite, nonzero and
/// away from 1.
pub fn is_nondegenerate(d: &LinkDiagram, s: &Solution) -> DegeneracyReport {
    let mut failures = Vec::new();
    for (ci, c) in d.crossings.iter().enumerate() {
        let r = crossing_ratios(d, c, s);
        for (q, &f) in r.values.iter().enumerate() {
            if !f.is_finite() || f.norm_sqr() == 0.0 || (f - 1.0).norm() <= DEGENERACY_TOL {
                failures.push((ci, q, f));
            }
        }
    }
    DegeneracyReport { failures }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResiduals {
    /// `exp(w_j ∂W/∂w_j) − 1`
    pub exp_form: Vec<C64>,
    /// `∏_c τ_{c,j} − 1`
    pub tau_form: Vec<C64>,
}

impl CriticalResiduals {
    pub fn max(&self) -> f64 {
        self.exp_form.iter().chain(&self.tau_form).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn critical_residuals(d: &LinkDiagram, s: &Solution) -> Result<CriticalResiduals, PotentialError> {
    let exp_form = wdw(d, s)?.into_iter().map(|g| g.exp() - 1.0).collect();
    let tau_form = (0..d.n_regions)
        .map(|j| {
            let mut p = C64::new(1.0, 0.0);
            for c in 0..d.crossings.len() {
                p *= tau(d, c, j, s)?;
            }
            Ok(p - 1.0)
        })
        .collect::<Result<_, PotentialError>>()?;
    Ok(CriticalResiduals { exp_form, tau_form })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeResult {
    pub w0: C64,
    pub vol: f64,
    /// In `[0, π²)`.
    pub cs: f64,
    pub residual_max: f64,
    pub nondegenerate: bool,
}

#[derive(Serialize)]
struct VolumeResultJson {
    #[serde(rename = "W0")]
    w0: [f64; 2],
    vol: f64,
    cs: f64,
    residual_max: f64,
    nondegenerate: bool,
}

impl Serialize for VolumeResult {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        VolumeResultJson {
            w0: to_pair(self.w0),
            vol: self.vol,
            cs: self.cs,
            residual_max: self.residual_max,
            nondegenerate: self.nondegenerate,
        }
        .serialize(ser)
    }
}

impl VolumeResult {
    pub fn from_w0(w0: C64, residual_max: f64, nondegenerate: bool) -> Self {
        VolumeResult { w0, vol: w0.im + 0.0, cs: reduce_mod_pi2(-w0.re), residual_max, nondegenerate }
    }
}

/// Filling-corrected potential
/// `W − Σ_j (w_j∂W) log w_j − Σ_{filled i} [(m_i∂W)(log m_i + u_iπi) − (r_i/s_i)(log m_i + u_iπi)²]`.
pub fn w0(d: &LinkDiagram, s: &Solution, f: &FillingSpec) -> Result<VolumeResult, PotentialError> {
    let h = d.n_components();
    if f.components.len() != h {
        return Err(RepresentationError::FillingArity { got: f.components.len(), want: h }.into());
    }
    for (i, c) in f.components.iter().enumerate() {
        if let Slope::Finite { s: 0, .. } = c.slope {
            return Err(PotentialError::MeridionalFilling(i));
        }
        if matches!(c.slope, Slope::Finite { .. }) && c.uv.is_none() {
            return Err(PotentialError::MissingUv(i));
        }
    }
    f.validate(&s.m)?;
    let report = is_nondegenerate(d, s);
    if !report.is_ok() {
        let (crossing, ratio, _) = report.failures[0];
        return Err(PotentialError::Degenerate { crossing, ratio });
    }
    let residual_max = critical_residuals(d, s)?.max();
    if !(residual_max <= SOLUTION_TOL) {
        return Err(PotentialError::NotASolution(residual_max));
    }
    let g = log_gradient(d, s)?;
    let mut val = total_potential(d, s);
    for j in 0..d.n_regions {
        val -= g[j] * plog(s.w[j]);
    }
    for (i, c) in f.components.iter().enumerate() {
        let Slope::Finite { r, s: sl } = c.slope else { continue };
        let (u, _) = c.uv.expect("checked above");
        let lm = plog(s.m[i]) + C64::new(0.0, PI * u as f64);
        val -= g[d.n_regions + i] * lm - (r as f64 / sl as f64) * lm * lm;
    }
    Ok(VolumeResult::from_w0(val, residual_max, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{build_diagram, parse_pd};

    #[test]
    fn all_ones_point_is_degenerate() {
        let d = build_diagram(&parse_pd("X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]").unwrap()).unwrap();
        let s = Solution::new(&d, vec![C64::new(1.0, 0.0); 6], vec![C64::new(1.0, 0.0)]).unwrap();
        let rep = is_nondegenerate(&d, &s);
        assert_eq!(rep.failures.len(), 20);
        for c in 0..4 {
            assert!(crossing_potential(&d, c, &s).norm() < 1e-14);
        }
    }

    #[test]
    fn monomial_merges() {
        assert_eq!(monomial(&[(1, 1), (2, -1), (1, -1)]), vec![(2, -1)]);
    }
}
