//! Bounded finite-difference stochastic approximation (Kiefer-Wolfowitz
//! with projection) for maximum likelihood on subsampled data.
//!
//! Each iteration draws one subsample, shared by all eight loss evaluations
//! of that iteration, and estimates each gradient coordinate by a central
//! difference between projected perturbed points:
//!
//! ```text
//! g_i = [L(P(theta + c_t e_i)) - L(P(theta - c_t e_i))] / |phi+_i - phi-_i|
//! theta_{t+1} = P(theta_t - a_t * g_t)          (elementwise)
//! a_t = a0 (A + t + 1)^-alpha,  c_t = c0 (t + 1)^-gamma
//! ```

use alloc::vec::Vec;

use rand::seq::index;

use crate::rng::{self, GkRng};
use crate::{dist, Error, Family, QdParams, Result, Theta};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_GAMMA: f64 = 0.49;
pub const DEFAULT_A0: f64 = 1.0;
pub const DEFAULT_STABILITY_OFFSET: f64 = 100.0;
pub const DEFAULT_C0_REPLICATES: usize = 20;
/// Perturbation scale used when the loss shows no sampling noise.
pub const C0_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSchedule {
    /// Step-size scale, per coordinate.
    pub a0: Theta,
    /// Perturbation scale, per coordinate; estimated from the loss noise when
    /// `None`.
    pub c0: Option<Theta>,
    pub alpha: f64,
    pub gamma: f64,
    /// The offset `A` in `a_t = a0 (A + t + 1)^-alpha`.
    pub stability_offset: f64,
}

impl Default for GainSchedule {
    fn default() -> Self {
        Self {
            a0: [DEFAULT_A0; 4],
            c0: None,
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            stability_offset: DEFAULT_STABILITY_OFFSET,
        }
    }
}

impl GainSchedule {
    /// `a_t`, elementwise.
    pub fn step(&self, t: usize) -> Theta {
        let f = (self.stability_offset + t as f64 + 1.0).powf(-self.alpha);
        self.a0.map(|a| a * f)
    }

    /// `c_t`, elementwise, for a given `c0`.
    pub fn perturbation(c0: &Theta, gamma: f64, t: usize) -> Theta {
        let f = (t as f64 + 1.0).powf(-gamma);
        c0.map(|c| c * f)
    }

    fn validate(&self) -> Result<()> {
        if self.a0.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(Error::Config("a0 must be non-negative and finite"));
        }
        if let Some(c0) = &self.c0 {
            if c0.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
                return Err(Error::Config("c0 must be positive and finite"));
            }
        }
        if !(0.0 < self.gamma && self.gamma < self.alpha && self.alpha <= 1.0) {
            return Err(Error::Config("gains need 0 < gamma < alpha <= 1"));
        }
        if !(self.stability_offset >= 0.0) {
            return Err(Error::Config("stability offset must be non-negative"));
        }
        Ok(())
    }
}

/// A noisy estimate of a loss, refreshed once per iteration.
pub trait LossEstimator {
    /// Draws the randomness (e.g. a data subsample) for the next iteration.
    fn resample(&mut self, rng: &mut GkRng);
    /// Loss at `theta` under the current randomness; `+inf` if undefined.
    fn loss(&self, theta: &Theta) -> f64;
}

/// `(n / m) * sum_{i in subsample} -log f(x_i; theta)`; `+inf` if any
/// density cannot be evaluated.
pub fn loss_estimate(
    data: &[f64],
    theta: &Theta,
    subsample: &[usize],
    log_b: bool,
    family: Family,
    c: f64,
) -> f64 {
    let Ok(p) = QdParams::from_theta(family, theta, log_b, c) else {
        return f64::INFINITY;
    };
    let mut total = 0.0;
    for &i in subsample {
        match dist::pdf(data[i], &p, true) {
            Ok(lp) if lp > f64::NEG_INFINITY => total -= lp,
            _ => return f64::INFINITY,
        }
    }
    total * data.len() as f64 / subsample.len() as f64
}

/// Negative log likelihood estimated on a uniform subsample of size `m`,
/// drawn without replacement.
#[derive(Debug, Clone)]
pub struct SubsampledNll<'a> {
    data: &'a [f64],
    m: usize,
    family: Family,
    log_b: bool,
    c: f64,
    subsample: Vec<usize>,
}

impl<'a> SubsampledNll<'a> {
    pub fn new(data: &'a [f64], m: usize, family: Family, log_b: bool, c: f64) -> Result<Self> {
        if m < 1 || m > data.len() {
            return Err(Error::Config("batch size must satisfy 1 <= m <= n"));
        }
        Ok(Self {
            data,
            m,
            family,
            log_b,
            c,
            subsample: (0..m).collect(),
        })
    }

    pub fn subsample(&self) -> &[usize] {
        &self.subsample
    }
}

impl LossEstimator for SubsampledNll<'_> {
    fn resample(&mut self, rng: &mut GkRng) {
        self.subsample = if self.m == self.data.len() {
            (0..self.m).collect()
        } else {
            index::sample(rng, self.data.len(), self.m).into_vec()
        };
    }

    fn loss(&self, theta: &Theta) -> f64 {
        loss_estimate(
            self.data,
            theta,
            &self.subsample,
            self.log_b,
            self.family,
            self.c,
        )
    }
}

/// Componentwise clamp of `theta` into `[lo, hi]`.
pub fn project(theta: &Theta, lo: &Theta, hi: &Theta) -> Theta {
    core::array::from_fn(|i| theta[i].max(lo[i]).min(hi[i]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdsaConfig {
    pub iterations: usize,
    pub theta0: Theta,
    pub lower: Theta,
    pub upper: Theta,
    /// Subsample size `m`.
    pub batch_size: usize,
    pub gains: GainSchedule,
    /// Number of loss replicates used to estimate `c0` when it is not given.
    pub c0_replicates: usize,
    /// Second coordinate of `theta` is `log B`.
    pub log_b: bool,
    pub c: f64,
    pub seed: u64,
}

impl FdsaConfig {
    pub fn new(iterations: usize, theta0: Theta, batch_size: usize, seed: u64) -> Self {
        Self {
            iterations,
            theta0,
            lower: [f64::NEG_INFINITY; 4],
            upper: [f64::INFINITY; 4],
            batch_size,
            gains: GainSchedule::default(),
            c0_replicates: DEFAULT_C0_REPLICATES,
            log_b: false,
            c: crate::DEFAULT_C,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        if self.theta0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "theta0" });
        }
        if (0..4).any(|i| !(self.lower[i] < self.upper[i])) {
            return Err(Error::Config("lower bounds must be below upper bounds"));
        }
        if (0..4).any(|i| self.theta0[i] < self.lower[i] || self.theta0[i] > self.upper[i]) {
            return Err(Error::Config("theta0 must lie within the bounds"));
        }
        if self.gains.c0.is_none() && self.c0_replicates < 2 {
            return Err(Error::Config("c0 estimation needs at least 2 replicates"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdsaResult {
    /// `theta_0..theta_N`.
    pub trajectory: Vec<Theta>,
    /// Per iteration, the mean of the finite perturbed-point losses, an
    /// estimate of the loss near `theta_t`.
    pub loss_estimates: Vec<f64>,
    /// Gradient estimate of each iteration.
    pub gradients: Vec<Theta>,
    /// The `c0` actually used.
    pub c0: Theta,
    pub c0_estimated: bool,
    /// Set when the estimated `c0` hit the noise floor.
    pub c0_floored: bool,
    /// Gradient components zeroed because both perturbed points were
    /// projected onto the same bound.
    pub boundary_pinches: usize,
    /// Gradient components zeroed because the loss stayed infinite after
    /// halving the perturbation.
    pub infinite_losses: usize,
}

impl FdsaResult {
    pub fn final_theta(&self) -> Theta {
        *self.trajectory.last().expect("trajectory is never empty")
    }
}

/// Estimated `c0`: the standard deviation of the loss at `theta0` over
/// independent resamples, and whether it had to be floored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C0Estimate {
    pub c0: Theta,
    pub floored: bool,
}

/// Standard deviation of the loss estimate at `theta0` over `replicates`
/// independent resamples, replicated to all four coordinates. Falls back to
/// [`C0_FLOOR`] when the estimate has no spread or is not finite.
pub fn estimate_c0_with<L: LossEstimator>(
    loss: &mut L,
    theta0: &Theta,
    replicates: usize,
    rng: &mut GkRng,
) -> Result<C0Estimate> {
    if replicates < 2 {
        return Err(Error::Config("c0 estimation needs at least 2 replicates"));
    }
    let values: Vec<f64> = (0..replicates)
        .map(|_| {
            loss.resample(rng);
            loss.loss(theta0)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / replicates as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (replicates - 1) as f64;
    let sd = var.sqrt();
    Ok(if sd > 1e-12 * mean.abs() && sd.is_finite() {
        C0Estimate {
            c0: [sd; 4],
            floored: false,
        }
    } else {
        C0Estimate {
            c0: [C0_FLOOR; 4],
            floored: true,
        }
    })
}

/// [`estimate_c0_with`] for the subsampled negative log likelihood.
pub fn estimate_c0(
    data: &[f64],
    theta0: &Theta,
    m: usize,
    replicates: usize,
    log_b: bool,
    family: Family,
    seed: u64,
) -> Result<C0Estimate> {
    let mut loss = SubsampledNll::new(data, m, family, log_b, crate::DEFAULT_C)?;
    estimate_c0_with(&mut loss, theta0, replicates, &mut rng::seeded(seed))
}

/// One gradient component, with the pinch and infinite-loss policies.
enum Component {
    Value(f64),
    Pinched,
    Undefined,
}

fn gradient_component<L: LossEstimator>(
    loss: &L,
    theta: &Theta,
    i: usize,
    step: f64,
    lo: &Theta,
    hi: &Theta,
    seen: &mut Vec<f64>,
) -> Component {
    let mut c = step;
    for _ in 0..2 {
        let mut plus = *theta;
        let mut minus = *theta;
        plus[i] += c;
        minus[i] -= c;
        let plus = project(&plus, lo, hi);
        let minus = project(&minus, lo, hi);
        let width = (plus[i] - minus[i]).abs();
        if width == 0.0 {
            return Component::Pinched;
        }
        let (lp, lm) = (loss.loss(&plus), loss.loss(&minus));
        for v in [lp, lm] {
            if v.is_finite() {
                seen.push(v);
            }
        }
        if lp.is_finite() && lm.is_finite() {
            return Component::Value((lp - lm) / width);
        }
        c *= 0.5;
    }
    Component::Undefined
}

/// Runs FDSA on an arbitrary loss estimator. `cfg.batch_size`, `cfg.log_b`
/// and `cfg.c` are not used here; they configure the likelihood loss built
/// by [`run_fdsa`].
pub fn run_fdsa_with<L: LossEstimator>(loss: &mut L, cfg: &FdsaConfig) -> Result<FdsaResult> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let (c0, c0_estimated, c0_floored) = match cfg.gains.c0 {
        Some(c0) => (c0, false, false),
        None => {
            let est = estimate_c0_with(loss, &cfg.theta0, cfg.c0_replicates, &mut rng)?;
            (est.c0, true, est.floored)
        }
    };

    let n = cfg.iterations;
    let mut theta = cfg.theta0;
    let mut trajectory = Vec::with_capacity(n + 1);
    let mut loss_estimates = Vec::with_capacity(n);
    let mut gradients = Vec::with_capacity(n);
    trajectory.push(theta);
    let mut pinches = 0;
    let mut undefined = 0;
    let mut seen = Vec::with_capacity(16);

    for t in 0..n {
        loss.resample(&mut rng);
        let a = cfg.gains.step(t);
        let c = GainSchedule::perturbation(&c0, cfg.gains.gamma, t);
        seen.clear();
        let mut grad = [0.0; 4];
        for i in 0..4 {
            grad[i] = match gradient_component(
                loss, &theta, i, c[i], &cfg.lower, &cfg.upper, &mut seen,
            ) {
                Component::Value(g) => g,
                Component::Pinched => {
                    pinches += 1;
                    0.0
                }
                Component::Undefined => {
                    undefined += 1;
                    0.0
                }
            };
        }
        let stepped: Theta = core::array::from_fn(|i| theta[i] - a[i] * grad[i]);
        theta = project(&stepped, &cfg.lower, &cfg.upper);

        loss_estimates.push(if seen.is_empty() {
            f64::INFINITY
        } else {
            seen.iter().sum::<f64>() / seen.len() as f64
        });
        gradients.push(grad);
        trajectory.push(theta);
    }

    Ok(FdsaResult {
        trajectory,
        loss_estimates,
        gradients,
        c0,
        c0_estimated,
        c0_floored,
        boundary_pinches: pinches,
        infinite_losses: undefined,
    })
}

/// Runs FDSA on the subsampled negative log likelihood of `data`.
pub fn run_fdsa(data: &[f64], cfg: &FdsaConfig, family: Family) -> Result<FdsaResult> {
    let mut loss = SubsampledNll::new(data, cfg.batch_size, family, cfg.log_b, cfg.c)?;
    run_fdsa_with(&mut loss, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Deterministic `|theta - target|^2`.
    struct Quadratic {
        target: Theta,
    }

    impl LossEstimator for Quadratic {
        fn resample(&mut self, _: &mut GkRng) {}
        fn loss(&self, theta: &Theta) -> f64 {
            theta
                .iter()
                .zip(&self.target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        }
    }

    fn sample_data(n: usize) -> Vec<f64> {
        let p = QdParams::new(Family::GK, 3.0, 1.0, 2.0, 0.5).unwrap();
        dist::sample(n, &p, &mut rng::seeded(77))
    }

    #[test]
    fn projection() {
        let lo = [0.0, -1.0, f64::NEG_INFINITY, 0.0];
        let hi = [1.0, 1.0, f64::INFINITY, f64::INFINITY];
        assert_eq!(project(&[0.5, 0.0, -1e9, 3.0], &lo, &hi), [0.5, 0.0, -1e9, 3.0]);
        assert_eq!(project(&[-5.0, 2.0, 0.0, -1.0], &lo, &hi), [0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn gain_schedules() {
        let g = GainSchedule::default();
        assert_eq!(g.step(0), [1.0 / 101.0; 4]);
        let c = GainSchedule::perturbation(&[2.0; 4], 0.49, 3);
        assert!((c[0] - 2.0 * 4f64.powf(-0.49)).abs() < 1e-15);
        // decreasing, with a_t / c_t^2 -> 0 and sum a_t divergent (alpha = 1)
        let mut prev = f64::INFINITY;
        let mut sum = 0.0;
        for t in 0..100_000 {
            let a = g.step(t)[0];
            assert!(a < prev);
            prev = a;
            sum += a;
        }
        assert!(sum > 6.0);
        let ratio = |t| g.step(t)[0] / GainSchedule::perturbation(&[1.0; 4], 0.49, t)[0].powi(2);
        assert!(ratio(1_000_000) < ratio(1000));
    }

    #[test]
    fn schedule_validation() {
        let mut cfg = FdsaConfig::new(10, [0.0; 4], 1, 0);
        cfg.gains.gamma = 1.0;
        assert!(run_fdsa_with(&mut Quadratic { target: [0.0; 4] }, &cfg).is_err());
        let mut cfg = FdsaConfig::new(10, [2.0, 0.0, 0.0, 0.0], 1, 0);
        cfg.upper[0] = 1.0;
        assert!(run_fdsa_with(&mut Quadratic { target: [0.0; 4] }, &cfg).is_err());
        let mut cfg = FdsaConfig::new(10, [0.0; 4], 1, 0);
        cfg.gains.c0 = Some([0.0; 4]);
        assert!(run_fdsa_with(&mut Quadratic { target: [0.0; 4] }, &cfg).is_err());
    }

    #[test]
    fn zero_gain_keeps_theta() {
        let data = sample_data(200);
        let mut cfg = FdsaConfig::new(20, [3.0, 0.0, 2.0, 0.5], 50, 1);
        cfg.gains.a0 = [0.0; 4];
        cfg.log_b = true;
        let out = run_fdsa(&data, &cfg, Family::GK).unwrap();
        assert!(out.trajectory.iter().all(|t| *t == cfg.theta0));
        assert_eq!(out.loss_estimates.len(), 20);
        assert!(out.c0_estimated);
    }

    #[test]
    fn converges_on_quadratic() {
        let target = [1.5, -2.0, 0.25, 3.0];
        let mut cfg = FdsaConfig::new(1000, [0.0; 4], 1, 0);
        cfg.gains.a0 = [50.0; 4];
        cfg.gains.c0 = Some([0.1; 4]);
        cfg.lower = [-10.0; 4];
        cfg.upper = [10.0; 4];
        let out = run_fdsa_with(&mut Quadratic { target }, &cfg).unwrap();
        let last = out.final_theta();
        for i in 0..4 {
            assert!((last[i] - target[i]).abs() < 1e-3, "{last:?}");
        }
        assert_eq!(out.boundary_pinches, 0);
        // estimated c0 of a noiseless loss is floored
        let est = estimate_c0_with(&mut Quadratic { target }, &[0.0; 4], 20, &mut rng::seeded(0)).unwrap();
        assert!(est.floored);
        assert_eq!(est.c0, [C0_FLOOR; 4]);
    }

    #[test]
    fn pinched_component_is_zeroed() {
        // The perturbation is below the floating-point spacing at 1e20, so
        // both perturbed points coincide.
        let mut cfg = FdsaConfig::new(3, [1e20, 0.0, 0.0, 0.0], 1, 0);
        cfg.gains.c0 = Some([1.0, 0.1, 0.1, 0.1]);
        let out = run_fdsa_with(&mut Quadratic { target: [0.0; 4] }, &cfg).unwrap();
        assert_eq!(out.boundary_pinches, 3);
        assert!(out.gradients.iter().all(|g| g[0] == 0.0));
        assert!(out.trajectory.iter().all(|t| t[0] == 1e20));
    }

    #[test]
    fn infinite_losses_are_skipped() {
        // k below -1/2 is invalid for every theta reached, so every
        // gradient component is undefined and theta does not move.
        let data = sample_data(50);
        let mut cfg = FdsaConfig::new(3, [3.0, 1.0, 2.0, -3.0], 50, 1);
        cfg.gains.c0 = Some([0.01; 4]);
        let out = run_fdsa(&data, &cfg, Family::GH).unwrap();
        assert_eq!(out.infinite_losses, 12);
        assert!(out.trajectory.iter().all(|t| *t == cfg.theta0));
        assert!(out.loss_estimates.iter().all(|l| l.is_infinite()));
    }

    #[test]
    fn loss_estimate_identities() {
        let data = sample_data(40);
        let theta = [3.0, 0.1, 2.0, 0.5];
        let all: Vec<usize> = (0..40).collect();
        let full = loss_estimate(&data, &theta, &all, true, Family::GK, 0.8);
        let nll = -crate::mcmc::log_likelihood(&data, &theta, true, Family::GK, 0.8);
        assert!((full - nll).abs() < 1e-9);

        let same = [0.7; 30];
        let p = QdParams::from_theta(Family::GK, &theta, true, 0.8).unwrap();
        let one = -dist::pdf(0.7, &p, true).unwrap();
        for m in [1, 7, 30] {
            let sub: Vec<usize> = (0..m).collect();
            let v = loss_estimate(&same, &theta, &sub, true, Family::GK, 0.8);
            assert!((v - 30.0 * one).abs() < 1e-9);
        }
        assert_eq!(
            loss_estimate(&data, &[0.0, -1.0, 0.0, 0.0], &all, false, Family::GK, 0.8),
            f64::INFINITY
        );
    }

    #[test]
    fn subsampled_loss_is_unbiased() {
        let data = sample_data(400);
        let theta = [3.0, 0.0, 2.0, 0.5];
        let all: Vec<usize> = (0..400).collect();
        let exact = loss_estimate(&data, &theta, &all, true, Family::GK, 0.8);
        let mut loss = SubsampledNll::new(&data, 40, Family::GK, true, 0.8).unwrap();
        let mut r = rng::seeded(4);
        let reps = 1000;
        let vals: Vec<f64> = (0..reps)
            .map(|_| {
                loss.resample(&mut r);
                loss.loss(&theta)
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * sd / (reps as f64).sqrt());
    }

    #[test]
    fn c0_estimates() {
        let data = sample_data(400);
        let theta = [3.0, 0.0, 2.0, 0.5];
        let full = estimate_c0(&data, &theta, 400, 20, true, Family::GK, 0).unwrap();
        assert!(full.floored);
        let same = [1.0; 50];
        assert!(estimate_c0(&same, &theta, 10, 20, true, Family::GK, 0).unwrap().floored);
        assert!(estimate_c0(&data, &theta, 10, 1, true, Family::GK, 0).is_err());

        // Without-replacement variance of the scaled sum ~ (n/m - 1):
        // doubling m from 50 to 100 shrinks it by (400/100 - 1)/(400/50 - 1) = 3/7.
        let v50 = estimate_c0(&data, &theta, 50, 1000, true, Family::GK, 1).unwrap().c0[0].powi(2);
        let v100 = estimate_c0(&data, &theta, 100, 1000, true, Family::GK, 2).unwrap().c0[0].powi(2);
        let ratio = v100 / v50;
        assert!((ratio - 3.0 / 7.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn full_batch_gradient_is_a_central_difference() {
        let data = sample_data(100);
        let mut cfg = FdsaConfig::new(5, [2.8, 0.1, 1.8, 0.4], 100, 3);
        cfg.log_b = true;
        cfg.gains.a0 = [1e-3; 4];
        cfg.gains.c0 = Some([0.05, 0.02, 0.05, 0.05]);
        let out = run_fdsa(&data, &cfg, Family::GK).unwrap();
        let all: Vec<usize> = (0..100).collect();
        let nll = |t: &Theta| loss_estimate(&data, t, &all, true, Family::GK, 0.8);
        for t in 0..5 {
            let theta = out.trajectory[t];
            let c = GainSchedule::perturbation(&cfg.gains.c0.unwrap(), cfg.gains.gamma, t);
            for i in 0..4 {
                let (mut p, mut m) = (theta, theta);
                p[i] += c[i];
                m[i] -= c[i];
                let fd = (nll(&p) - nll(&m)) / (p[i] - m[i]);
                assert!((out.gradients[t][i] - fd).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn trajectory_respects_bounds(seed in 0u64..500, a0 in 0.0f64..100.0, lo in -3.0f64..0.0, width in 0.01f64..3.0) {
            let mut cfg = FdsaConfig::new(30, [lo; 4], 1, seed);
            cfg.lower = [lo; 4];
            cfg.upper = [lo + width; 4];
            cfg.gains.a0 = [a0; 4];
            cfg.gains.c0 = Some([0.5; 4]);
            let out = run_fdsa_with(&mut Quadratic { target: [5.0, -5.0, 0.0, 1.0] }, &cfg).unwrap();
            for t in &out.trajectory {
                for i in 0..4 {
                    prop_assert!(t[i] >= cfg.lower[i] && t[i] <= cfg.upper[i]);
                }
            }
        }

        #[test]
        fn project_is_idempotent(t in proptest::array::uniform4(-10.0f64..10.0), lo in -5.0f64..0.0, w in 0.0f64..5.0) {
            let lo4 = [lo; 4];
            let hi4 = [lo + w; 4];
            let once = project(&t, &lo4, &hi4);
            prop_assert_eq!(project(&once, &lo4, &hi4), once);
        }
    }
}
