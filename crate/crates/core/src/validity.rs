//! Which `(g, k/h, c)` combinations give a strictly increasing quantile
//! function.
//!
//! `Q'(z)` has the sign of `R(z)` ([`crate::dist::r_func`]), so validity is
//! equivalent to `R(z) > 0` for all `z`. Two routes are provided:
//!
//! * [`theoretical_validity`] applies the closed-form results: `h < 0` or
//!   `k < -1/2` is invalid, `c > 1` with `g != 0` is invalid, and `k, h >= 0`
//!   is valid whenever `0 <= c < c*` with `c* ~= 0.8336`.
//! * [`is_valid`] minimises `R` numerically from several starting points.
//!   It can miss a negative region (false positive) but never reports a
//!   valid parameter as invalid, since any negative value it finds is real.
//!
//! [`assess`] combines them: theory when it is decisive, numerics otherwise.

use alloc::vec::Vec;


use crate::{dist, roots, Error, Family, QdParams, Result};

/// Supremum of `c` for which every `k >= 0` (or `h >= 0`) is valid.
///
/// Equal to `1 / (u sech^2 u + tanh u)` at the root of `u tanh u = 1`.
pub const C_STAR: f64 = 0.833_556_559_600_964_7;

/// Default optimiser starting points for [`is_valid`].
pub const DEFAULT_INITIAL_Z: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

const GRID_HALF_WIDTH: f64 = 10.0;
const GRID_STEP: f64 = 0.05;
const MIN_X_TOL: f64 = 1e-10;
const MIN_MAX_ITER: usize = 500;
/// Bound on the downhill bracket search; beyond this `R` is at its limit.
const SEARCH_CAP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theory {
    Valid,
    Invalid,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityStatus {
    ValidTheoretical,
    InvalidTheoretical,
    ValidNumerical,
    InvalidNumerical,
}

impl ValidityStatus {
    pub fn is_valid(self) -> bool {
        matches!(
            self,
            ValidityStatus::ValidTheoretical | ValidityStatus::ValidNumerical
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityVerdict {
    pub status: ValidityStatus,
    /// Smallest value of `R` located, `None` for theoretical verdicts.
    pub min_r: Option<f64>,
    pub argmin_z: Option<f64>,
}

impl ValidityVerdict {
    pub fn is_valid(&self) -> bool {
        self.status.is_valid()
    }
}

/// Closed-form verdict. Negative `c` is first mapped to positive `c` through
/// the `(g, c) -> (-g, -c)` symmetry of `Q`.
pub fn theoretical_validity(p: &QdParams) -> Theory {
    let (g, c) = if p.c() < 0.0 {
        (-p.g(), -p.c())
    } else {
        (p.g(), p.c())
    };
    let kh = p.kh();
    let tail_invalid = match p.family() {
        Family::GH => kh < 0.0,
        Family::GK => kh < -0.5,
    };
    if tail_invalid || (c > 1.0 && g != 0.0) {
        return Theory::Invalid;
    }
    if kh >= 0.0 && c < C_STAR {
        return Theory::Valid;
    }
    Theory::Unknown
}

/// Numerical validity test: minimises `R(z)` from each of `initial_z`, plus
/// the minimum of a coarse grid scan over `z` in `[-10, 10]`, and reports
/// valid iff every located minimum is positive.
pub fn is_valid(p: &QdParams, initial_z: &[f64]) -> Result<ValidityVerdict> {
    if initial_z.is_empty() {
        return Err(Error::Config("initial_z must not be empty"));
    }
    if let Some(bad) = initial_z.iter().find(|z| !z.is_finite()) {
        return Err(Error::MinimizerFailed { start: *bad });
    }
    let r = |z: f64| dist::r_func(z, p).unwrap_or(f64::NAN);

    let steps = (2.0 * GRID_HALF_WIDTH / GRID_STEP).round() as i64;
    let (mut best_z, mut best_r) = (0.0, r(0.0));
    for i in 0..=steps {
        let z = -GRID_HALF_WIDTH + i as f64 * GRID_STEP;
        let v = r(z);
        if v < best_r {
            best_z = z;
            best_r = v;
        }
    }

    let mut starts: Vec<f64> = initial_z.to_vec();
    starts.push(best_z);
    for start in starts {
        let (z, v) = local_min(&r, start)?;
        if v < best_r {
            best_r = v;
            best_z = z;
        }
    }

    let status = if best_r > 0.0 {
        ValidityStatus::ValidNumerical
    } else {
        ValidityStatus::InvalidNumerical
    };
    Ok(ValidityVerdict {
        status,
        min_r: Some(best_r),
        argmin_z: Some(best_z),
    })
}

/// Theory first; numerical minimisation only where theory is silent.
pub fn assess(p: &QdParams, initial_z: &[f64]) -> Result<ValidityVerdict> {
    let status = match theoretical_validity(p) {
        Theory::Valid => ValidityStatus::ValidTheoretical,
        Theory::Invalid => ValidityStatus::InvalidTheoretical,
        Theory::Unknown => return is_valid(p, initial_z),
    };
    Ok(ValidityVerdict {
        status,
        min_r: None,
        argmin_z: None,
    })
}

/// Walks downhill from `start` with growing steps until `f` rises, then
/// polishes the bracketed minimum with Brent's method.
fn local_min<F: Fn(f64) -> f64>(f: &F, start: f64) -> Result<(f64, f64)> {
    let fail = Error::MinimizerFailed { start };
    let mut step = 0.1;
    let f0 = f(start);
    let (fp, fm) = (f(start + step), f(start - step));
    if f0.is_nan() || fp.is_nan() || fm.is_nan() {
        return Err(fail);
    }
    let (lo, hi) = if fp >= f0 && fm >= f0 {
        (start - step, start + step)
    } else {
        let dir = if fp < fm { 1.0 } else { -1.0 };
        let (mut prev, mut cur) = (start, start + dir * step);
        let mut f_cur = if dir > 0.0 { fp } else { fm };
        loop {
            step *= 2.0;
            let next = cur + dir * step;
            if next.abs() > SEARCH_CAP {
                // Still descending at the cap: R approaches its limit here.
                let edge = dir * SEARCH_CAP;
                let fe = f(edge);
                if fe.is_nan() {
                    return Err(fail);
                }
                return Ok(if fe < f_cur { (edge, fe) } else { (cur, f_cur) });
            }
            let f_next = f(next);
            if f_next.is_nan() {
                return Err(fail);
            }
            if f_next >= f_cur {
                break if dir > 0.0 { (prev, next) } else { (next, prev) };
            }
            prev = cur;
            cur = next;
            f_cur = f_next;
        }
    };
    let m = roots::brent_minimize(f, lo, hi, MIN_X_TOL, MIN_MAX_ITER).ok_or(fail)?;
    Ok((m.x, m.fx))
}

/// Minimises `1 / (u sech^2 u + tanh u)` over `u` in `(0, u_max]`.
///
/// The result is the largest asymmetry constant for which all non-negative
/// `k` or `h` give valid distributions.
pub fn compute_c_star(u_max: f64, tol: f64) -> Result<f64> {
    if !(u_max > 0.0) || !u_max.is_finite() {
        return Err(Error::Config("u_max must be positive and finite"));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("tol must be positive"));
    }
    let f = |u: f64| {
        let sech = 1.0 / u.cosh();
        1.0 / (u * sech * sech + u.tanh())
    };
    let m = roots::brent_minimize(f, 0.0, u_max, tol, MIN_MAX_ITER)
        .ok_or(Error::MinimizerFailed { start: u_max })?;
    // The infimum may sit on the closed end of the interval.
    let at_end = f(u_max);
    Ok(m.fx.min(at_end))
}

/// Practical lower bound on `k` for the g-and-k family with `c = 0.8`:
/// `max(-0.5, -0.045 - 0.01 g^2)`.
pub fn safe_k_floor(g: f64) -> f64 {
    (-0.045 - 0.01 * g * g).max(-0.5)
}
