//! Timing of quantile, sampling, cdf and pdf against normal-distribution
//! baselines.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use gk_core::rng::{self, GkRng};
use gk_core::{dist, normal, Error, Family, QdParams};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CliError, Result};

pub const WARMUP_ROUNDS: usize = 3;
pub const MIN_REPEATS: usize = 10;
pub const DEFAULT_REPEATS: usize = 30;
pub const DEFAULT_POINTS: usize = 100;
/// `(A, B, g, k/h)` used for both families.
pub const BENCH_PARAMS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Sample,
    Quantile,
    Cdf,
    Pdf,
}

impl Operation {
    pub const ALL: [Operation; 4] = [
        Operation::Sample,
        Operation::Quantile,
        Operation::Cdf,
        Operation::Pdf,
    ];
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operation::Sample => "sample",
            Operation::Quantile => "quantile",
            Operation::Cdf => "cdf",
            Operation::Pdf => "pdf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Normal,
    Dist(Family),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Normal => f.write_str("normal"),
            Target::Dist(fam) => write!(f, "{fam}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub operation: Operation,
    pub target: Target,
    /// Microseconds per call on `n_points` inputs.
    pub mean_us: f64,
    pub median_us: f64,
    /// `mean_us` relative to the normal baseline for the same operation.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub n_eval: usize,
    pub warmup: usize,
    pub repeats: usize,
}

impl BenchReport {
    pub fn get(&self, op: Operation, target: Target) -> &BenchRow {
        self.rows
            .iter()
            .find(|r| r.operation == op && r.target == target)
            .expect("every operation and target is benchmarked")
    }
}

/// Runs `f` for the warmup rounds, then times `repeats` calls.
fn time_it<F: FnMut() -> f64>(mut f: F, repeats: usize) -> (f64, f64) {
    for _ in 0..WARMUP_ROUNDS {
        black_box(f());
    }
    let mut times: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            black_box(f());
            start.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    let mean = times.iter().sum::<f64>() / repeats as f64;
    times.sort_by(f64::total_cmp);
    let mid = repeats / 2;
    let median = if repeats % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    };
    (mean, median)
}

struct Inputs {
    u: Vec<f64>,
    x: Vec<f64>,
}

fn run_op(op: Operation, target: Target, p: &QdParams, inp: &Inputs, rng: &mut GkRng) -> f64 {
    let n = inp.u.len();
    // Every branch folds its outputs into a checksum so none can be elided.
    match (op, target) {
        (Operation::Sample, Target::Normal) => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).sum(),
        (Operation::Quantile, Target::Normal) => inp.u.iter().map(|&u| normal::quantile(u)).sum(),
        (Operation::Cdf, Target::Normal) => inp.x.iter().map(|&x| normal::cdf(x)).sum(),
        (Operation::Pdf, Target::Normal) => inp.x.iter().map(|&x| normal::pdf(x)).sum(),
        (Operation::Sample, Target::Dist(_)) => dist::sample(n, p, rng).iter().sum(),
        (Operation::Quantile, Target::Dist(_)) => {
            inp.u.iter().map(|&u| dist::quantile(u, p).unwrap_or(f64::NAN)).sum()
        }
        (Operation::Cdf, Target::Dist(_)) => inp.x.iter().map(|&x| dist::cdf(x, p).unwrap_or(f64::NAN)).sum(),
        (Operation::Pdf, Target::Dist(_)) => {
            inp.x.iter().map(|&x| dist::pdf(x, p, false).unwrap_or(f64::NAN)).sum()
        }
    }
}

/// Checks that the benchmarked calls return correct values before timing.
fn spot_check(p: &QdParams, inp: &Inputs) -> Result<()> {
    for (&u, &x) in inp.u.iter().zip(&inp.x) {
        let back = dist::cdf(x, p)?;
        let dens = dist::pdf(x, p, false)?;
        if (back - u).abs() > 1e-8 || !(dens > 0.0) {
            return Err(CliError::Core(Error::RootNotFound { x }));
        }
    }
    Ok(())
}

pub fn run_bench(n_points: usize, repeats: usize, seed: u64) -> Result<BenchReport> {
    if repeats < MIN_REPEATS {
        return Err(CliError::usage(format!("bench needs at least {MIN_REPEATS} repeats")));
    }
    if n_points == 0 {
        return Err(CliError::usage("bench needs at least one point"));
    }
    let [a, b, g, kh] = BENCH_PARAMS;
    let mut rng = rng::seeded(seed);
    let u: Vec<f64> = (0..n_points).map(|_| rng.random_range(0.001..0.999)).collect();

    let targets = [Target::Normal, Target::Dist(Family::GK), Target::Dist(Family::GH)];
    let mut rows = Vec::new();
    for op in Operation::ALL {
        let mut normal_mean = f64::NAN;
        for target in targets {
            let family = match target {
                Target::Normal => Family::GK,
                Target::Dist(f) => f,
            };
            let p = match target {
                Target::Normal => QdParams::new(Family::GK, 0.0, 1.0, 0.0, 0.0)?,
                Target::Dist(_) => QdParams::new(family, a, b, g, kh)?,
            };
            let x = u
                .iter()
                .map(|&ui| dist::quantile(ui, &p))
                .collect::<gk_core::Result<Vec<_>>>()?;
            let inp = Inputs { u: u.clone(), x };
            spot_check(&p, &inp)?;
            let (mean_us, median_us) = time_it(|| run_op(op, target, &p, &inp, &mut rng), repeats);
            if target == Target::Normal {
                normal_mean = mean_us;
            }
            rows.push(BenchRow {
                operation: op,
                target,
                mean_us,
                median_us,
                ratio: mean_us / normal_mean,
            });
        }
    }
    Ok(BenchReport {
        rows,
        n_eval: n_points,
        warmup: WARMUP_ROUNDS,
        repeats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_shape() {
        let r = run_bench(20, 10, 1).unwrap();
        assert_eq!(r.rows.len(), 12);
        for row in &r.rows {
            assert!(row.mean_us > 0.0 && row.median_us > 0.0);
            if row.target == Target::Normal {
                assert_eq!(row.ratio, 1.0);
            }
        }
        assert!(run_bench(20, 9, 1).is_err());
    }
}
