//! Adaptive Metropolis sampling of the posterior of `(A, B, g, k/h)` given
//! IID data.
//!
//! For the first `t0` iterations proposals are `N(theta_{t-1}, Sigma0)`.
//! After that the proposal covariance is `(2.4^2 / 4) (S_{t-1} + eps I)`,
//! where `S_{t-1}` is the sample covariance of `theta_1..theta_{t-1}`
//! (rejections included, `theta_0` excluded), updated incrementally.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, Mat4, RunningCovariance};
use crate::{dist, rng, Error, Family, QdParams, Result, Theta};

/// `2.4^2 / d` with `d = 4`.
pub const ADAPTIVE_SCALE: f64 = 2.4 * 2.4 / 4.0;
pub const DEFAULT_T0: usize = 100;
pub const DEFAULT_EPSILON: f64 = 1e-6;

pub struct McmcConfig<P> {
    pub iterations: usize,
    pub theta0: Theta,
    pub sigma0: Mat4,
    /// Number of iterations that use `sigma0` before adaptation starts.
    pub t0: usize,
    /// Ridge added to the empirical covariance.
    pub epsilon: f64,
    /// Second coordinate of `theta` is `log B` rather than `B`.
    pub log_b: bool,
    /// Asymmetry constant `c`.
    pub c: f64,
    /// Log prior density of a state; may return `-inf`.
    pub log_prior: P,
}

impl<P: Fn(&Theta) -> f64> McmcConfig<P> {
    pub fn new(iterations: usize, theta0: Theta, sigma0: Mat4, log_prior: P) -> Self {
        Self {
            iterations,
            theta0,
            sigma0,
            t0: DEFAULT_T0,
            epsilon: DEFAULT_EPSILON,
            log_b: false,
            c: crate::DEFAULT_C,
            log_prior,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1"));
        }
        if self.t0 < 1 {
            return Err(Error::Config("t0 must be at least 1"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive"));
        }
        if self.theta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "theta0" });
        }
        if !linalg::is_symmetric(&self.sigma0, 1e-12) {
            return Err(Error::Config("sigma0 must be symmetric"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcResult {
    /// `theta_0..theta_N`.
    pub chain: Vec<Theta>,
    pub acceptance_count: usize,
    /// Proposal covariance used at the last iteration.
    pub final_proposal_cov: Mat4,
    /// Proposals whose likelihood could not be evaluated (treated as zero).
    pub likelihood_failures: usize,
}

impl McmcResult {
    pub fn acceptance_rate(&self) -> f64 {
        self.acceptance_count as f64 / (self.chain.len() - 1) as f64
    }
}

/// Log likelihood, failing on the first observation whose density cannot be
/// evaluated.
pub fn try_log_likelihood(
    data: &[f64],
    theta: &Theta,
    log_b: bool,
    family: Family,
    c: f64,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::NotEnoughData { needed: 1, got: 0 });
    }
    let p = QdParams::from_theta(family, theta, log_b, c)?;
    let mut total = 0.0;
    for &x in data {
        let lp = dist::pdf(x, &p, true)?;
        if lp == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += lp;
    }
    Ok(total)
}

/// `sum_i log f(x_i; theta)`; `-inf` when any density is zero or cannot be
/// evaluated (invalid parameters, empty data).
pub fn log_likelihood(data: &[f64], theta: &Theta, log_b: bool, family: Family, c: f64) -> f64 {
    try_log_likelihood(data, theta, log_b, family, c).unwrap_or(f64::NEG_INFINITY)
}

/// Runs the adaptive Metropolis sampler for `cfg.iterations` steps.
pub fn run_mcmc<P: Fn(&Theta) -> f64>(
    data: &[f64],
    cfg: &McmcConfig<P>,
    family: Family,
    seed: u64,
) -> Result<McmcResult> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::NotEnoughData { needed: 1, got: 0 });
    }
    let sigma0_chol = linalg::cholesky(&cfg.sigma0).ok_or(Error::NotPositiveDefinite)?;
    let prior0 = (cfg.log_prior)(&cfg.theta0);
    if prior0 == f64::NEG_INFINITY || prior0.is_nan() {
        return Err(Error::Config("log prior of theta0 is -inf"));
    }

    let mut rng = rng::seeded(seed);
    let mut failures = 0;
    let eval = |theta: &Theta, failures: &mut usize| {
        match try_log_likelihood(data, theta, cfg.log_b, family, cfg.c) {
            Ok(v) => v,
            Err(_) => {
                *failures += 1;
                f64::NEG_INFINITY
            }
        }
    };

    let mut current = cfg.theta0;
    let mut current_lp = prior0 + eval(&current, &mut failures);

    let mut chain = Vec::with_capacity(cfg.iterations + 1);
    chain.push(current);
    let mut history = RunningCovariance::new();
    let mut accepted = 0;
    let mut proposal_cov = cfg.sigma0;

    for t in 1..=cfg.iterations {
        let chol = if t <= cfg.t0 {
            proposal_cov = cfg.sigma0;
            sigma0_chol
        } else {
            proposal_cov =
                linalg::scale_add_ridge(&history.covariance(), ADAPTIVE_SCALE, cfg.epsilon);
            linalg::cholesky(&proposal_cov).ok_or(Error::NotPositiveDefinite)?
        };

        let z: Theta = core::array::from_fn(|_| rng.sample(StandardNormal));
        let step = linalg::lower_mul(&chol, &z);
        let proposal: Theta = core::array::from_fn(|i| current[i] + step[i]);

        let prior = (cfg.log_prior)(&proposal);
        let log_u = rng.random::<f64>().ln();
        if prior > f64::NEG_INFINITY {
            let lp = prior + eval(&proposal, &mut failures);
            // u < r, with r evaluated as a difference of logs.
            if log_u < lp - current_lp {
                current = proposal;
                current_lp = lp;
                accepted += 1;
            }
        }

        chain.push(current);
        history.push(&current);
    }

    Ok(McmcResult {
        chain,
        acceptance_count: accepted,
        final_proposal_cov: proposal_cov,
        likelihood_failures: failures,
    })
}
