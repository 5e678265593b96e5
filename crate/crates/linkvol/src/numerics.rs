//! Complex logarithm and dilogarithm on the principal branch, plus
//! comparison of values that are only defined modulo π².

use std::f64::consts::PI;

pub use num_complex::Complex64 as C64;

/// π².
pub const PI2: f64 = PI * PI;

const ZETA2: f64 = PI2 / 6.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericsError {
    #[error("log of zero")]
    LogOfZero,
    #[error("non-finite argument")]
    NonFinite,
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Principal logarithm with `arg z ∈ (−π, π]`.
///
/// A negative real number with a negative-zero imaginary part still maps to
/// `arg = π`.
pub fn principal_log(z: C64) -> Result<C64, NumericsError> {
    if !finite(z) {
        return Err(NumericsError::NonFinite);
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Err(NumericsError::LogOfZero);
    }
    Ok(plog(z))
}

#[inline]
pub(crate) fn plog(z: C64) -> C64 {
    let mut arg = z.im.atan2(z.re);
    if z.im == 0.0 && arg < 0.0 {
        arg = PI;
    }
    C64::new(z.norm().ln(), arg)
}

/// B_{2k} / (2k+1)! for k = 1..15.
const BERNOULLI: [f64; 15] = [
    0.027777777777777778,
    -0.00027777777777777778,
    4.7241118669690098e-6,
    -9.1857730746619636e-8,
    1.8978869988970999e-9,
    -4.0647616451442255e-11,
    8.9216910204564526e-13,
    -1.9939295860721076e-14,
    4.5189800296199182e-16,
    -1.0356517612181247e-17,
    2.3952186210261867e-19,
    -5.5817858743250093e-21,
    1.3091507554183213e-22,
    -3.0874198024267403e-24,
    7.3159756527022034e-26,
];

/// Dilogarithm `Li₂(z) = −∫₀^z log(1−t)/t dt` on the principal branch.
///
/// On the cut `z ∈ (1, ∞)` the value is the limit from below,
/// `Im Li₂(x) = −π log x`.
pub fn dilog(z: C64) -> Result<C64, NumericsError> {
    if !finite(z) {
        return Err(NumericsError::NonFinite);
    }
    Ok(li2(z))
}

pub(crate) fn li2(z: C64) -> C64 {
    if z.re == 0.0 && z.im == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if z.re == 1.0 && z.im == 0.0 {
        return C64::new(ZETA2, 0.0);
    }
    if z.norm_sqr() > 1.0 {
        let l = plog(-z);
        return -ZETA2 - 0.5 * l * l - li2_disc(z.inv());
    }
    li2_disc(z)
}

// |z| <= 1
fn li2_disc(z: C64) -> C64 {
    if z.re > 0.5 {
        let w = 1.0 - z;
        if w.re == 0.0 && w.im == 0.0 {
            return C64::new(ZETA2, 0.0);
        }
        return ZETA2 - plog(z) * plog(w) - li2_series(w);
    }
    li2_series(z)
}

// |z| <= 1 and Re z <= 1/2, so |u| < 1.3
fn li2_series(z: C64) -> C64 {
    let u = -plog(1.0 - z);
    let u2 = u * u;
    let mut acc = C64::new(0.0, 0.0);
    for c in BERNOULLI.iter().rev() {
        acc = acc * u2 + c;
    }
    u - 0.25 * u2 + acc * u2 * u
}

/// Reduce a real number into `[0, π²)`. Results within `1e-9` of `π²` fold to 0.
pub fn reduce_mod_pi2(x: f64) -> f64 {
    let r = x.rem_euclid(PI2);
    if r >= PI2 - 1e-9 {
        0.0
    } else {
        r + 0.0
    }
}

/// Distance from `x` to the nearest integer multiple of π².
pub fn dist_to_pi2_lattice(x: f64) -> f64 {
    let r = reduce_mod_pi2(x);
    r.min(PI2 - r)
}

/// Equality of two values modulo `π²` in the real part.
pub fn mod_pi2_equal(a: C64, b: C64, tol: f64) -> bool {
    (a.im - b.im).abs() <= tol && dist_to_pi2_lattice(a.re - b.re) <= tol
}

/// `[re, im]` pair as used by every JSON format in this crate.
pub fn to_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn from_pair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn log_examples() {
        assert_eq!(principal_log(c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        let l = principal_log(c(-1.0, 0.0)).unwrap();
        assert!((l - c(0.0, PI)).norm() < 1e-15);
        let l = principal_log(c(-1.0, -0.0)).unwrap();
        assert!((l - c(0.0, PI)).norm() < 1e-15);
        let l = principal_log(c(-1.0, -1e-16)).unwrap();
        assert!((l - c(0.0, -PI)).norm() < 1e-12);
        assert_eq!(principal_log(c(0.0, 0.0)), Err(NumericsError::LogOfZero));
        assert_eq!(principal_log(c(f64::NAN, 0.0)), Err(NumericsError::NonFinite));
    }

    #[test]
    fn dilog_special_values() {
        assert_eq!(dilog(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let zeta2: f64 = (1..200_000).map(|k| 1.0 / (k as f64).powi(2)).sum();
        assert!((dilog(c(1.0, 0.0)).unwrap().re - zeta2).abs() < 1e-5);
        let alt: f64 = (1..200_000).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64).powi(2)).sum();
        assert!((dilog(c(-1.0, 0.0)).unwrap().re - alt).abs() < 1e-9);
        assert!((dilog(c(-1.0, 0.0)).unwrap() - c(-PI2 / 12.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn dilog_reference_points() {
        // mpmath, 30 digits
        let table = [
            (c(0.5, 0.5), c(0.453985269150295583, 0.643767332889268749)),
            (c(2.0, 0.0), c(2.46740110027233965, -2.17758609030360213)),
            (c(-3.0, 4.0), c(-2.38809080452774494, 1.6431791600530448)),
            (c(0.9, -0.2), c(1.18986558260356238, -0.447184904723911741)),
            (c(0.0, 1.0), c(-0.205616758356028305, 0.915965594177219015)),
            (c(0.3, 0.0), c(0.326129510075476056, 0.0)),
            (c(10.0, -0.001), c(0.535987122662983624, -7.23356470566585066)),
            (c(-0.5, 0.866), c(-0.54830592145655991, 0.676609240985298679)),
            (c(1.5, 0.001), c(2.37230169617889209, 1.27426900036232075)),
        ];
        for (z, want) in table {
            let got = dilog(z).unwrap();
            assert!((got - want).norm() <= 1e-13 * want.norm().max(1.0), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn mod_pi2_examples() {
        assert!(mod_pi2_equal(c(3.0, 2.0), c(3.0 + PI2, 2.0), 1e-9));
        assert!(!mod_pi2_equal(c(3.0, 2.0), c(3.0, 2.1), 1e-9));
        assert!(mod_pi2_equal(c(-3.33836, 1.73712), c(-3.33836 + 9.8696, 1.73712), 1e-3));
        assert!((reduce_mod_pi2(-1.0) - (PI2 - 1.0)).abs() < 1e-15);
    }
}
