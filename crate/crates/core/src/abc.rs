//! Rejection ABC with a variance-weighted Euclidean distance between
//! summary statistics.
//!
//! Simulations run in batches. The per-coordinate weights `v_j` (the
//! unbiased variance of each simulated summary coordinate) are estimated on
//! the first batch and reused for every later batch. Each simulation `i`
//! draws its parameters and its summaries from its own random stream
//! [`rng::stream`]`(seed, i)`, so the output does not depend on the batch size
//! other than through the weights.

use alloc::vec::Vec;

use rand::Rng;

use crate::orderstats::{moment_summaries, simulate_octiles};
use crate::rng::{self, GkRng};
use crate::summary::{summarize, SummaryKind};
use crate::{dist, Error, Family, QdParams, Result, Theta};

pub const DEFAULT_BATCH_SIZE: usize = 10_000;

/// A prior that can be sampled. Draws are `(A, B, g, k/h)` on the natural
/// scale.
pub trait Prior {
    fn draw(&self, rng: &mut GkRng) -> Theta;

    /// `count` independent draws, one row each.
    fn draw_many(&self, rng: &mut GkRng, count: usize) -> Vec<Theta> {
        (0..count).map(|_| self.draw(rng)).collect()
    }
}

impl<F: Fn(&mut GkRng) -> Theta> Prior for F {
    fn draw(&self, rng: &mut GkRng) -> Theta {
        self(rng)
    }
}

/// Independent uniform priors on each coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBox {
    lo: Theta,
    hi: Theta,
}

impl UniformBox {
    pub fn new(lo: Theta, hi: Theta) -> Result<Self> {
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "prior bound",
            });
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::Config("prior lower bounds must be below upper bounds"));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> Theta {
        self.lo
    }

    pub fn hi(&self) -> Theta {
        self.hi
    }

    pub fn contains(&self, theta: &Theta) -> bool {
        (0..4).all(|i| self.lo[i] <= theta[i] && theta[i] <= self.hi[i])
    }
}

impl Prior for UniformBox {
    fn draw(&self, rng: &mut GkRng) -> Theta {
        core::array::from_fn(|i| self.lo[i] + (self.hi[i] - self.lo[i]) * rng.random::<f64>())
    }
}

pub struct AbcConfig<P> {
    /// Total number of simulations `N`.
    pub simulations: usize,
    /// Number of simulations to keep, `M`.
    pub accepted: usize,
    pub batch_size: usize,
    pub kind: SummaryKind,
    pub prior: P,
    pub seed: u64,
    /// Asymmetry constant `c`.
    pub c: f64,
    /// Fixed distance weights; estimated from the first batch when `None`.
    pub weights: Option<Vec<f64>>,
}

impl<P: Prior> AbcConfig<P> {
    pub fn new(simulations: usize, accepted: usize, kind: SummaryKind, prior: P, seed: u64) -> Self {
        Self {
            simulations,
            accepted,
            batch_size: DEFAULT_BATCH_SIZE.max(accepted),
            kind,
            prior,
            seed,
            c: crate::DEFAULT_C,
            weights: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbcResult {
    /// Accepted parameter rows, closest first.
    pub accepted: Vec<Theta>,
    /// Distances of the accepted rows, ascending.
    pub distances: Vec<f64>,
    /// Simulation index of each accepted row.
    pub indices: Vec<usize>,
    /// Weights `v_j` used in the distance.
    pub weights_v: Vec<f64>,
    /// Simulations whose summaries could not be computed (distance `+inf`).
    pub simulation_failures: usize,
}

/// Simulates summary statistics of a dataset of size `n` from `p`.
///
/// Octile-based summaries use the fast order-statistic simulation; full
/// order statistics simulate and sort `n` draws.
pub fn simulate_summary<R: Rng + ?Sized>(
    p: &QdParams,
    n: usize,
    kind: SummaryKind,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let out = match kind {
        SummaryKind::FullOrderStats => {
            let mut x = dist::sample(n, p, rng);
            x.sort_by(f64::total_cmp);
            x
        }
        SummaryKind::Octiles => simulate_octiles(p, n, rng)?.values().to_vec(),
        SummaryKind::MomentEstimates => moment_summaries(&simulate_octiles(p, n, rng)?)?.to_vec(),
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "simulated summary",
        });
    }
    Ok(out)
}

/// Draws the parameters and summaries of simulation `index`.
pub fn simulate_one<P: Prior>(
    cfg: &AbcConfig<P>,
    family: Family,
    n: usize,
    index: usize,
) -> (Theta, Result<Vec<f64>>) {
    let mut rng = rng::stream(cfg.seed, index as u64);
    let theta = cfg.prior.draw(&mut rng);
    let summary = QdParams::from_theta(family, &theta, false, cfg.c)
        .and_then(|p| simulate_summary(&p, n, cfg.kind, &mut rng));
    (theta, summary)
}

/// Unbiased per-coordinate variances of the summaries of simulations
/// `0..count`, ignoring failed simulations.
pub fn estimate_weights<P: Prior>(
    cfg: &AbcConfig<P>,
    family: Family,
    n: usize,
    count: usize,
) -> Result<Vec<f64>> {
    let q = cfg.kind.dim(n);
    let mut seen = 0usize;
    let mut mean = alloc::vec![0.0; q];
    let mut m2 = alloc::vec![0.0; q];
    for i in 0..count {
        if let (_, Ok(s)) = simulate_one(cfg, family, n, i) {
            seen += 1;
            for j in 0..q {
                let d = s[j] - mean[j];
                mean[j] += d / seen as f64;
                m2[j] += d * (s[j] - mean[j]);
            }
        }
    }
    if seen < 2 {
        return Err(Error::DegenerateWeight { coordinate: 0 });
    }
    let v: Vec<f64> = m2.iter().map(|m| m / (seen - 1) as f64).collect();
    check_weights(&v, q)?;
    Ok(v)
}

fn check_weights(v: &[f64], q: usize) -> Result<()> {
    if v.len() != q {
        return Err(Error::Config("weights length must match the summary dimension"));
    }
    match v.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
        Some(coordinate) => Err(Error::DegenerateWeight { coordinate }),
        None => Ok(()),
    }
}

/// Weighted squared distance `sum_j (s_j - s0_j)^2 / v_j`.
pub fn distance(s: &[f64], s0: &[f64], v: &[f64]) -> f64 {
    s.iter()
        .zip(s0)
        .zip(v)
        .map(|((a, b), w)| (a - b) * (a - b) / w)
        .sum()
}

/// Runs rejection ABC and returns the `M` simulations closest to `data`.
///
/// Ties in distance keep the earlier simulation.
pub fn run_abc<P: Prior>(data: &[f64], cfg: &AbcConfig<P>, family: Family) -> Result<AbcResult> {
    if cfg.accepted < 1 || cfg.accepted > cfg.simulations {
        return Err(Error::Config("need 1 <= M <= N"));
    }
    if cfg.batch_size < cfg.accepted {
        return Err(Error::Config("batch size must be at least M"));
    }
    let n = data.len();
    let s0 = summarize(data, cfg.kind)?;
    let q = s0.len();

    let first_batch = cfg.batch_size.min(cfg.simulations);
    let weights = match &cfg.weights {
        Some(w) => {
            check_weights(w, q)?;
            w.clone()
        }
        None => estimate_weights(cfg, family, n, first_batch)?,
    };

    let mut kept: Vec<(f64, usize, Theta)> = Vec::with_capacity(cfg.accepted + cfg.batch_size);
    let mut failures = 0;
    let mut start = 0;
    while start < cfg.simulations {
        let end = (start + cfg.batch_size).min(cfg.simulations);
        for i in start..end {
            let (theta, summary) = simulate_one(cfg, family, n, i);
            let d = match summary {
                Ok(s) => distance(&s, &s0, &weights),
                Err(_) => {
                    failures += 1;
                    f64::INFINITY
                }
            };
            kept.push((d, i, theta));
        }
        kept.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        kept.truncate(cfg.accepted);
        start = end;
    }

    Ok(AbcResult {
        accepted: kept.iter().map(|k| k.2).collect(),
        distances: kept.iter().map(|k| k.0).collect(),
        indices: kept.iter().map(|k| k.1).collect(),
        weights_v: weights,
        simulation_failures: failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn data() -> Vec<f64> {
        let p = QdParams::new(Family::GK, 3.0, 1.0, 2.0, 0.5).unwrap();
        dist::sample(500, &p, &mut rng::seeded(100))
    }

    fn box_prior() -> UniformBox {
        UniformBox::new([0.0, 0.0, 0.0, 0.0], [10.0, 5.0, 5.0, 10.0]).unwrap()
    }

    #[test]
    fn accept_everything_returns_the_prior_draws() {
        let d = data();
        let mut cfg = AbcConfig::new(300, 300, SummaryKind::MomentEstimates, box_prior(), 4);
        cfg.batch_size = 300;
        let out = run_abc(&d, &cfg, Family::GK).unwrap();
        let mut idx = out.indices.clone();
        idx.sort();
        assert_eq!(idx, (0..300).collect::<Vec<_>>());
        for (theta, &i) in out.accepted.iter().zip(&out.indices) {
            let mut r = rng::stream(4, i as u64);
            assert_eq!(*theta, box_prior().draw(&mut r));
        }
        assert!(out.distances.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kept_distances_are_the_smallest() {
        let d = data();
        for kind in [SummaryKind::Octiles, SummaryKind::MomentEstimates, SummaryKind::FullOrderStats] {
            let mut cfg = AbcConfig::new(400, 20, kind, box_prior(), 8);
            cfg.batch_size = 100;
            let out = run_abc(&d, &cfg, Family::GK).unwrap();
            let s0 = summarize(&d, kind).unwrap();
            let mut all: Vec<f64> = (0..400)
                .map(|i| match simulate_one(&cfg, Family::GK, d.len(), i).1 {
                    Ok(s) => distance(&s, &s0, &out.weights_v),
                    Err(_) => f64::INFINITY,
                })
                .collect();
            all.sort_by(f64::total_cmp);
            assert_eq!(out.distances, all[..20].to_vec());
            assert!(out.weights_v.iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn batching_only_changes_weights() {
        let d = data();
        let mut single = AbcConfig::new(400, 30, SummaryKind::MomentEstimates, box_prior(), 12);
        single.batch_size = 400;
        let w = run_abc(&d, &single, Family::GK).unwrap().weights_v;
        single.weights = Some(w.clone());
        let mut batched = AbcConfig::new(400, 30, SummaryKind::MomentEstimates, box_prior(), 12);
        batched.batch_size = 200;
        batched.weights = Some(w);
        assert_eq!(
            run_abc(&d, &single, Family::GK).unwrap(),
            run_abc(&d, &batched, Family::GK).unwrap()
        );
    }

    #[test]
    fn point_mass_prior() {
        let d = data();
        let truth = [3.0, 1.0, 2.0, 0.5];
        let point = move |r: &mut GkRng| {
            let _: f64 = r.random();
            truth
        };
        let mut cfg = AbcConfig::new(50, 50, SummaryKind::MomentEstimates, point, 1);
        cfg.batch_size = 50;
        let out = run_abc(&d, &cfg, Family::GK).unwrap();
        assert!(out.accepted.iter().all(|t| *t == truth));
        assert_eq!(out.simulation_failures, 0);
    }

    #[test]
    fn degenerate_weights_are_reported() {
        // A prior with zero skewness and a constant summary coordinate.
        let d = data();
        let symmetric = |r: &mut GkRng| [0.0, 1.0 + r.random::<f64>(), 0.0, 0.0];
        let mut cfg = AbcConfig::new(20, 5, SummaryKind::MomentEstimates, symmetric, 2);
        cfg.weights = Some(alloc::vec![1.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            run_abc(&d, &cfg, Family::GK),
            Err(Error::DegenerateWeight { coordinate: 2 })
        );
        cfg.weights = Some(alloc::vec![1.0; 3]);
        assert!(run_abc(&d, &cfg, Family::GK).is_err());
    }

    #[test]
    fn config_errors() {
        let d = data();
        let cfg = AbcConfig::new(10, 11, SummaryKind::Octiles, box_prior(), 0);
        assert!(run_abc(&d, &cfg, Family::GK).is_err());
        let mut cfg = AbcConfig::new(10, 5, SummaryKind::Octiles, box_prior(), 0);
        cfg.batch_size = 4;
        assert!(run_abc(&d, &cfg, Family::GK).is_err());
        let cfg = AbcConfig::new(10, 5, SummaryKind::Octiles, box_prior(), 0);
        assert!(run_abc(&d[..5], &cfg, Family::GK).is_err());
        assert!(UniformBox::new([0.0; 4], [1.0, 1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn distance_is_scale_equivariant() {
        // Scaling coordinate j of every summary by a scales v_j by a^2.
        let d = data();
        let cfg = AbcConfig::new(200, 10, SummaryKind::MomentEstimates, box_prior(), 6);
        let s0 = summarize(&d, cfg.kind).unwrap();
        let v = estimate_weights(&cfg, Family::GK, d.len(), 200).unwrap();
        let scale = [1.0, 10.0, 1.0, 1.0];
        let s0s: Vec<f64> = s0.iter().zip(scale).map(|(a, b)| a * b).collect();
        let vs: Vec<f64> = v.iter().zip(scale).map(|(a, b)| a * b * b).collect();
        for i in 0..50 {
            let s = simulate_one(&cfg, Family::GK, d.len(), i).1.unwrap();
            let ss: Vec<f64> = s.iter().zip(scale).map(|(a, b)| a * b).collect();
            let d1 = distance(&s, &s0, &v);
            let d2 = distance(&ss, &s0s, &vs);
            assert!((d1 - d2).abs() <= 1e-10 * d1.max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn accepted_rows_in_prior_support(seed in 0u64..1000, m in 1usize..20) {
            let d = data();
            let prior = UniformBox::new([2.0, 0.5, 1.0, 0.0], [4.0, 1.5, 3.0, 1.0]).unwrap();
            let mut cfg = AbcConfig::new(100, m, SummaryKind::Octiles, prior, seed);
            cfg.batch_size = 40;
            let out = run_abc(&d, &cfg, Family::GK).unwrap();
            prop_assert_eq!(out.accepted.len(), m);
            prop_assert!(out.accepted.iter().all(|t| prior.contains(t)));
        }
    }
}
