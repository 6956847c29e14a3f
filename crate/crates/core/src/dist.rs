//! Distribution functions: the `Q` transforms, their derivatives, and the
//! quantile / sampling / cdf / pdf routines for both families.
//!
//! None of these functions check that the parameters define a valid
//! (strictly increasing) quantile function. With invalid parameters the cdf
//! may fail to locate a root and the pdf reports
//! [`Error::InvalidDerivative`] when it lands on a non-positive slope.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{normal, roots, Error, Family, QdParams, Result};

/// Initial half-width of the z bracket used by the cdf.
pub const Z_BRACKET: f64 = 5.0;
/// Largest |z| the cdf searches before saturating.
pub const Z_CAP: f64 = 50.0;
/// Bracket width at which the cdf root search stops.
pub const Z_TOL: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 200;

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "z" })
    }
}

/// Skewness factor `1 + c tanh(g z / 2)`.
#[inline]
fn skew(z: f64, p: &QdParams) -> f64 {
    1.0 + p.c() * (0.5 * p.g() * z).tanh()
}

/// Tail factor: `(1 + z^2)^k` or `exp(h z^2 / 2)`.
#[inline]
fn tail(z: f64, p: &QdParams) -> f64 {
    match p.family() {
        Family::GK => (1.0 + z * z).powf(p.kh()),
        Family::GH => (0.5 * p.kh() * z * z).exp(),
    }
}

#[inline]
fn ln_tail(z: f64, p: &QdParams) -> f64 {
    match p.family() {
        Family::GK => p.kh() * (z * z).ln_1p(),
        Family::GH => 0.5 * p.kh() * z * z,
    }
}

#[inline]
fn z2q_unchecked(z: f64, p: &QdParams) -> f64 {
    p.a() + p.b() * skew(z, p) * z * tail(z, p)
}

/// The transform `Q(z)` mapping a standard normal value to the distribution.
pub fn z2q(z: f64, p: &QdParams) -> Result<f64> {
    check_z(z)?;
    Ok(z2q_unchecked(z, p))
}

#[inline]
fn r_unchecked(z: f64, p: &QdParams) -> f64 {
    let half = 0.5 * p.g() * z;
    let cosh = half.cosh();
    // cosh overflows to inf for large |g z|, which correctly zeroes the term.
    let bump = p.c() * p.g() * z / (2.0 * cosh * cosh);
    let shape = match p.family() {
        Family::GK => {
            let z2 = z * z;
            (1.0 + (2.0 * p.kh() + 1.0) * z2) / (1.0 + z2)
        }
        Family::GH => 1.0 + p.kh() * z * z,
    };
    (1.0 + p.c() * half.tanh()) * shape + bump
}

/// `R(z)`, the factor of `Q'(z)` that carries its sign:
/// `Q'(z) = B (1 + z^2)^k R(z)` for g-and-k and `B exp(h z^2 / 2) R(z)` for
/// g-and-h.
pub fn r_func(z: f64, p: &QdParams) -> Result<f64> {
    check_z(z)?;
    Ok(r_unchecked(z, p))
}

/// Derivative `Q'(z)`.
pub fn q_deriv(z: f64, p: &QdParams) -> Result<f64> {
    check_z(z)?;
    Ok(p.b() * tail(z, p) * r_unchecked(z, p))
}

/// Quantile function `F^{-1}(u) = Q(Phi^{-1}(u))`.
///
/// `u = 0` and `u = 1` map to `-inf` and `+inf`.
pub fn quantile(u: f64, p: &QdParams) -> Result<f64> {
    if u.is_nan() || !(0.0..=1.0).contains(&u) {
        return Err(Error::ProbabilityOutOfRange(u));
    }
    if u == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if u == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(z2q_unchecked(normal::quantile(u), p))
}

/// `n` IID draws, generated by pushing N(0, 1) draws through `Q`.
pub fn sample<R: Rng + ?Sized>(n: usize, p: &QdParams, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            z2q_unchecked(z, p)
        })
        .collect()
}

/// Which tail a saturated cdf query fell into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    Lower,
    Upper,
}

/// Solution of `Q(z) = x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Located {
    /// The root, or `-Z_CAP` / `+Z_CAP` when saturated.
    pub z: f64,
    /// Set when no root exists within `|z| <= Z_CAP`.
    pub saturated: Option<Saturation>,
}

impl Located {
    /// Probability-scale value `Phi(z)`; exactly 0 or 1 when saturated.
    pub fn u(&self) -> f64 {
        match self.saturated {
            Some(Saturation::Lower) => 0.0,
            Some(Saturation::Upper) => 1.0,
            None => normal::cdf(self.z),
        }
    }
}

/// Solves `Q(z) = x` for `z`.
///
/// Starts from `z` in `[-5, 5]` and doubles the bracket on the side that
/// lacks a sign change until `|z|` would pass [`Z_CAP`], then refines with
/// Brent's method to a z-bracket of [`Z_TOL`].
pub fn locate(x: f64, p: &QdParams) -> Result<Located> {
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "x" });
    }
    let f = |z: f64| z2q_unchecked(z, p) - x;

    let (mut lo, mut hi) = (-Z_BRACKET, Z_BRACKET);
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    // A valid Q is strictly increasing, so every probe must move f in the
    // expected direction. Anything else means the parameters are invalid and
    // a saturated answer would be silently wrong.
    if !(f_lo < f_hi) {
        return Err(Error::RootNotFound { x });
    }
    while f_lo > 0.0 {
        if lo <= -Z_CAP {
            return Ok(Located {
                z: -Z_CAP,
                saturated: Some(Saturation::Lower),
            });
        }
        hi = lo;
        f_hi = f_lo;
        lo = (2.0 * lo).max(-Z_CAP);
        f_lo = f(lo);
        if !(f_lo < f_hi) {
            return Err(Error::RootNotFound { x });
        }
    }
    while f_hi < 0.0 {
        if hi >= Z_CAP {
            return Ok(Located {
                z: Z_CAP,
                saturated: Some(Saturation::Upper),
            });
        }
        lo = hi;
        f_lo = f_hi;
        hi = (2.0 * hi).min(Z_CAP);
        f_hi = f(hi);
        if !(f_hi > f_lo) {
            return Err(Error::RootNotFound { x });
        }
    }

    let root =
        roots::brent_root(f, lo, hi, Z_TOL, 0.0, ROOT_MAX_ITER).ok_or(Error::RootNotFound { x })?;
    Ok(Located {
        z: root.x,
        saturated: None,
    })
}

/// Distribution function `F(x)`.
pub fn cdf(x: f64, p: &QdParams) -> Result<f64> {
    locate(x, p).map(|l| l.u())
}

/// The cdf on the standard normal scale, `Phi^{-1}(F(x))`, which keeps its
/// precision far into the tails.
pub fn cdf_z(x: f64, p: &QdParams) -> Result<f64> {
    locate(x, p).map(|l| l.z)
}

/// Density `f(x) = phi(z) / Q'(z)` with `z = Q^{-1}(x)`, or its natural log
/// when `log` is set. The log path is computed as `ln phi(z) - ln Q'(z)`.
///
/// Points beyond the saturation cap have density 0 (log density `-inf`).
pub fn pdf(x: f64, p: &QdParams, log: bool) -> Result<f64> {
    let loc = locate(x, p)?;
    if loc.saturated.is_some() {
        return Ok(if log { f64::NEG_INFINITY } else { 0.0 });
    }
    let z = loc.z;
    let r = r_unchecked(z, p);
    if !(r > 0.0) {
        return Err(Error::InvalidDerivative {
            z,
            value: p.b() * tail(z, p) * r,
        });
    }
    if log {
        Ok(normal::ln_pdf(z) - p.b().ln() - ln_tail(z, p) - r.ln())
    } else {
        Ok((normal::ln_pdf(z) - p.b().ln() - ln_tail(z, p) - r.ln()).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn gk(a: f64, b: f64, g: f64, k: f64) -> QdParams {
        QdParams::new(Family::GK, a, b, g, k).unwrap()
    }
    fn gh(a: f64, b: f64, g: f64, h: f64) -> QdParams {
        QdParams::new(Family::GH, a, b, g, h).unwrap()
    }

    #[test]
    fn z2q_basic_values() {
        let p = gk(1.0, 2.0, 3.0, 4.0);
        assert_eq!(z2q(0.0, &p).unwrap(), 1.0);
        assert_eq!(z2q(1.0, &gk(0.0, 2.0, 0.0, 0.0)).unwrap(), 2.0);
        // mpmath, 40 digits: 1 + 2*(1 + 0.8*tanh(1.5))*1*2^4
        let expected = 56.171_795_293_308_58;
        assert!((z2q(1.0, &p).unwrap() - expected).abs() < 1e-12);
        assert!(z2q(f64::NAN, &p).is_err());
        assert!(z2q(f64::INFINITY, &p).is_err());
    }

    #[test]
    fn derivative_at_zero_is_scale() {
        assert_eq!(q_deriv(0.0, &gk(0.0, 1.0, 0.0, 0.0)).unwrap(), 1.0);
        for p in [gk(1.0, 2.5, 3.0, 0.4), gh(-1.0, 0.3, -2.0, 0.2)] {
            assert!((q_deriv(0.0, &p).unwrap() - p.b()).abs() < 1e-15);
            assert_eq!(r_func(0.0, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn r_is_one_without_shape() {
        let p = QdParams::with_c(Family::GK, 2.0, 3.0, 0.0, 0.0, 0.5).unwrap();
        for z in [-7.0, -1.0, 0.3, 4.0, 25.0] {
            assert!((r_func(z, &p).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn r_goes_negative_for_strongly_invalid_gk() {
        let p = gk(0.0, 1.0, 5.0, -0.6);
        let min = (-2000..=2000)
            .map(|i| r_func(i as f64 * 0.005, &p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min < 0.0);
    }

    #[test]
    fn derivative_matches_central_difference_gh() {
        let p = gh(0.0, 1.0, 2.0, 0.5);
        let z = 1.3;
        let h = 1e-5;
        let fd = (z2q(z + h, &p).unwrap() - z2q(z - h, &p).unwrap()) / (2.0 * h);
        let d = q_deriv(z, &p).unwrap();
        assert!(((d - fd) / d).abs() < 1e-6, "{d} vs {fd}");
    }

    #[test]
    fn quantile_special_values() {
        let p = gh(1.0, 2.0, 0.5, 0.1);
        assert_eq!(quantile(0.5, &p).unwrap(), 1.0);
        assert_eq!(quantile(0.0, &p).unwrap(), f64::NEG_INFINITY);
        assert_eq!(quantile(1.0, &p).unwrap(), f64::INFINITY);
        assert_eq!(quantile(1.2, &p), Err(Error::ProbabilityOutOfRange(1.2)));
        assert!(quantile(f64::NAN, &p).is_err());
        let std = gk(0.0, 1.0, 0.0, 0.0);
        assert!((quantile(0.975, &std).unwrap() - 1.959_964).abs() < 1e-6);
    }

    #[test]
    fn cdf_inverts_quantile() {
        let p = gh(1.0, 2.0, 0.5, 0.1);
        for u in [0.01, 0.3, 0.9, 0.99] {
            let x = quantile(u, &p).unwrap();
            assert!((cdf(x, &p).unwrap() - u).abs() < 1e-8);
        }
        let std = gk(0.0, 1.0, 0.0, 0.0);
        assert!((cdf(1.959_964, &std).unwrap() - 0.975).abs() < 1e-6);
        assert!((cdf(3.5, &gk(3.5, 1.0, 2.0, 0.5)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cdf_saturates_far_in_the_tails() {
        let p = gk(0.0, 1.0, 0.0, 0.0);
        let hi = locate(1e3, &p).unwrap();
        assert_eq!(hi.saturated, Some(Saturation::Upper));
        assert_eq!(hi.z, Z_CAP);
        assert_eq!(hi.u(), 1.0);
        let lo = locate(-1e3, &p).unwrap();
        assert_eq!(lo.saturated, Some(Saturation::Lower));
        assert_eq!(cdf(-1e3, &p).unwrap(), 0.0);
        assert_eq!(pdf(1e3, &p, true).unwrap(), f64::NEG_INFINITY);
        assert!(locate(f64::NAN, &p).is_err());
    }

    #[test]
    fn zscale_keeps_tail_precision() {
        let p = gk(0.0, 1.0, 0.0, 0.0);
        let z = cdf_z(-30.0, &p).unwrap();
        assert!((z + 30.0).abs() < 1e-10);
    }

    #[test]
    fn pdf_standard_normal_and_log() {
        let p = gk(0.0, 1.0, 0.0, 0.0);
        assert!((pdf(0.0, &p, false).unwrap() - 0.398_942_3).abs() < 1e-7);
        let lp = pdf(0.7, &p, true).unwrap();
        assert!((lp - pdf(0.7, &p, false).unwrap().ln()).abs() < 1e-12);
        // log path survives where the density underflows
        let far = gk(0.0, 1.0, 0.0, 0.0);
        let l = pdf(39.0, &far, true).unwrap();
        assert!((l - (-0.5 * 39.0 * 39.0 - 0.918_938_533_204_672_8)).abs() < 1e-8);
        assert_eq!(pdf(39.0, &far, false).unwrap(), 0.0);
    }

    #[test]
    fn pdf_matches_cdf_slope() {
        let p = gh(0.0, 1.0, 1.0, 0.2);
        let x = 0.7;
        let h = 1e-5;
        let fd = (cdf(x + h, &p).unwrap() - cdf(x - h, &p).unwrap()) / (2.0 * h);
        let d = pdf(x, &p, false).unwrap();
        assert!(((d - fd) / d).abs() < 1e-5);
    }

    #[test]
    fn invalid_parameters_fail_loudly() {
        // g-and-h with h < 0 rises to a maximum near z = sqrt(2) and then
        // decays back to A; the far-tail search must not report saturation.
        let p = gh(0.0, 1.0, 0.0, -0.5);
        let x = z2q(2.0, &p).unwrap();
        assert_eq!(locate(x, &p), Err(Error::RootNotFound { x }));
        assert!(pdf(x, &p, false).unwrap_err().is_numeric_failure());

        // Badly invalid g-and-k: any root found on a falling stretch of Q is
        // reported through the derivative check.
        let p = gk(0.0, 1.0, 5.0, -0.6);
        let mut flagged = 0;
        for i in -40..=40 {
            let x = i as f64 * 0.05;
            match pdf(x, &p, false) {
                Ok(d) => assert!(d > 0.0),
                Err(e) => {
                    assert!(e.is_numeric_failure());
                    flagged += 1;
                }
            }
        }
        assert!(flagged > 0);
    }

    #[test]
    fn sample_is_reproducible() {
        let p = gk(1.0, 2.0, 3.0, 0.5);
        assert!(sample(0, &p, &mut rng::seeded(1)).is_empty());
        let a = sample(100, &p, &mut rng::seeded(42));
        let b = sample(100, &p, &mut rng::seeded(42));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn mirror_symmetry(z in -20.0f64..20.0, g in -8.0f64..8.0, k in 0.0f64..2.0, c in -1.0f64..1.0) {
            for fam in [Family::GK, Family::GH] {
                let p = QdParams::with_c(fam, 0.5, 1.5, g, k, c).unwrap();
                let m = QdParams::with_c(fam, 0.5, 1.5, -g, k, -c).unwrap();
                prop_assert_eq!(z2q(z, &p).unwrap(), z2q(z, &m).unwrap());
            }
        }

        #[test]
        fn monotone_for_valid_params(z1 in -10.0f64..10.0, dz in 1e-3f64..5.0, g in -6.0f64..6.0, k in 0.0f64..1.0) {
            for fam in [Family::GK, Family::GH] {
                let p = QdParams::new(fam, 0.0, 1.0, g, k).unwrap();
                prop_assert!(z2q(z1, &p).unwrap() < z2q(z1 + dz, &p).unwrap());
            }
        }

        #[test]
        fn r_factorises_derivative(z in -8.0f64..8.0, g in -6.0f64..6.0, k in -0.4f64..1.0) {
            for fam in [Family::GK, Family::GH] {
                let p = QdParams::new(fam, 1.0, 0.7, g, k).unwrap();
                let d = q_deriv(z, &p).unwrap();
                let r = r_func(z, &p).unwrap();
                prop_assert_eq!(d.signum(), r.signum());
                let h = 1e-5;
                let fd = (z2q(z + h, &p).unwrap() - z2q(z - h, &p).unwrap()) / (2.0 * h);
                prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1e-3));
            }
        }
    }
}
