//! The log-returns workflow: ABC with moment summaries, FDSA started at the
//! ABC means, and adaptive Metropolis started at the FDSA end point with a
//! proposal covariance taken from the tail of the FDSA trajectory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gk_core::abc::{self, AbcConfig, UniformBox};
use gk_core::fdsa::{self, FdsaConfig, GainSchedule};
use gk_core::linalg::{self, Mat4};
use gk_core::mcmc::{self, McmcConfig};
use gk_core::summary::SummaryKind;
use gk_core::{dist, Family, QdParams, Theta};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::output::{fmt_f64, CsvBuffer};

/// Prior box `-1 < A < 1, 0 < B < 1, -5 < g < 5, 0 < k < 10`.
pub const DEFAULT_ABC_LOWER: Theta = [-1.0, 0.0, -5.0, 0.0];
pub const DEFAULT_ABC_UPPER: Theta = [1.0, 1.0, 5.0, 10.0];
pub const DEFAULT_FDSA_A0: Theta = [1e-6, 1e-2, 1e-2, 1e-2];
/// Perturbation widths on the (A, log B, g, k) scale. The loss-sd estimate
/// is on the likelihood scale and overshoots badly for daily returns.
pub const DEFAULT_FDSA_C0: Theta = [1e-2; 4];
/// Number of trailing FDSA states (plus the final one) whose covariance
/// seeds the MCMC proposal.
pub const SIGMA0_WINDOW: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Abc,
    Fdsa,
    Mcmc,
    All,
}

impl Stage {
    fn runs(self, s: Stage) -> bool {
        let rank = |s: Stage| match s {
            Stage::Abc => 0,
            Stage::Fdsa => 1,
            Stage::Mcmc | Stage::All => 2,
        };
        rank(s) <= rank(self)
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "abc" => Ok(Stage::Abc),
            "fdsa" => Ok(Stage::Fdsa),
            "mcmc" => Ok(Stage::Mcmc),
            "all" => Ok(Stage::All),
            _ => Err(format!("unknown stage '{s}' (abc, fdsa, mcmc, all)")),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Abc => "abc",
            Stage::Fdsa => "fdsa",
            Stage::Mcmc => "mcmc",
            Stage::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeConfig {
    pub stage: Stage,
    pub family: Family,
    pub c: f64,
    pub seed: u64,
    pub abc_simulations: usize,
    pub abc_accepted: usize,
    pub abc_batch_size: usize,
    pub abc_lower: Theta,
    pub abc_upper: Theta,
    pub fdsa_iterations: usize,
    pub fdsa_batch_size: usize,
    pub fdsa_a0: Theta,
    /// Estimated from the loss noise when `None`.
    pub fdsa_c0: Option<Theta>,
    pub mcmc_iterations: usize,
    pub mcmc_t0: usize,
    pub mcmc_epsilon: f64,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            stage: Stage::All,
            family: Family::GK,
            c: gk_core::DEFAULT_C,
            seed: 1,
            abc_simulations: 1_000_000,
            abc_accepted: 200,
            abc_batch_size: abc::DEFAULT_BATCH_SIZE,
            abc_lower: DEFAULT_ABC_LOWER,
            abc_upper: DEFAULT_ABC_UPPER,
            fdsa_iterations: 10_000,
            fdsa_batch_size: 100,
            fdsa_a0: DEFAULT_FDSA_A0,
            fdsa_c0: Some(DEFAULT_FDSA_C0),
            mcmc_iterations: 10_000,
            mcmc_t0: mcmc::DEFAULT_T0,
            mcmc_epsilon: mcmc::DEFAULT_EPSILON,
        }
    }
}

impl AnalyzeConfig {
    pub fn record(&self, m: &mut RunManifest) {
        m.param("stage", self.stage);
        m.param("family", self.family);
        m.param("c", fmt_f64(self.c));
        m.param("abc.simulations", self.abc_simulations);
        m.param("abc.accepted", self.abc_accepted);
        m.param("abc.batch_size", self.abc_batch_size);
        m.param("abc.lower", join(&self.abc_lower));
        m.param("abc.upper", join(&self.abc_upper));
        m.param("fdsa.iterations", self.fdsa_iterations);
        m.param("fdsa.batch_size", self.fdsa_batch_size);
        m.param("fdsa.a0", join(&self.fdsa_a0));
        m.param(
            "fdsa.c0",
            self.fdsa_c0.map_or_else(|| "auto".to_owned(), |c| join(&c)),
        );
        m.param("mcmc.iterations", self.mcmc_iterations);
        m.param("mcmc.t0", self.mcmc_t0);
        m.param("mcmc.epsilon", fmt_f64(self.mcmc_epsilon));
        m.seed = Some(self.seed);
    }
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

/// Point estimates on the natural `(A, B, g, k/h)` scale.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Estimates {
    pub abc: Option<Theta>,
    pub fdsa: Option<Theta>,
    pub mcmc: Option<Theta>,
}

impl Estimates {
    fn stages(&self) -> Vec<(&'static str, Theta)> {
        [("abc", self.abc), ("fdsa", self.fdsa), ("mcmc", self.mcmc)]
            .into_iter()
            .filter_map(|(n, t)| t.map(|t| (n, t)))
            .collect()
    }
}

fn column_means(rows: &[Theta]) -> Theta {
    let n = rows.len() as f64;
    std::array::from_fn(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
}

fn to_natural(theta: &Theta) -> Theta {
    [theta[0], theta[1].exp(), theta[2], theta[3]]
}

const THETA_LOG_HEADER: [&str; 4] = ["A", "logB", "g", "kh"];

fn save(buf: CsvBuffer, dir: &Path, name: &str, m: &mut RunManifest) -> Result<PathBuf> {
    let path = dir.join(name);
    buf.finish(Some(&path))?;
    m.artifact(&path);
    Ok(path)
}

/// Sample covariance of the last `SIGMA0_WINDOW + 1` states, falling back
/// to its diagonal (floored) when it is not positive definite.
pub fn sigma0_from_trajectory(trajectory: &[Theta]) -> (Mat4, bool) {
    let start = trajectory.len().saturating_sub(SIGMA0_WINDOW + 1);
    let cov = linalg::batch_covariance(&trajectory[start..]);
    if linalg::cholesky(&cov).is_some() {
        return (cov, false);
    }
    let mut diag = [[0.0; 4]; 4];
    for i in 0..4 {
        diag[i][i] = cov[i][i].max(1e-12);
    }
    (diag, true)
}

/// Improper prior uniform on `(A, B, g, k/h)` with `k/h >= 0`, expressed on
/// `(A, log B, g, k/h)`: the Jacobian contributes `log B`.
pub fn uniform_original_log_b(theta: &Theta) -> f64 {
    if theta[3] < 0.0 {
        f64::NEG_INFINITY
    } else {
        theta[1]
    }
}

pub fn run_analyze(
    returns: &[f64],
    cfg: &AnalyzeConfig,
    out_dir: &Path,
    m: &mut RunManifest,
) -> Result<Estimates> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut est = Estimates::default();

    let mut buf = CsvBuffer::new(["t", "log_return"])?;
    for (t, r) in returns.iter().enumerate() {
        buf.row([(t + 1).to_string(), fmt_f64(*r)])?;
    }
    save(buf, out_dir, "returns.csv", m)?;

    // ABC
    let prior = UniformBox::new(cfg.abc_lower, cfg.abc_upper)?;
    let mut abc_cfg = AbcConfig::new(
        cfg.abc_simulations,
        cfg.abc_accepted,
        SummaryKind::MomentEstimates,
        prior,
        cfg.seed,
    );
    abc_cfg.batch_size = cfg.abc_batch_size.max(cfg.abc_accepted);
    abc_cfg.c = cfg.c;
    let abc_out = abc::run_abc(returns, &abc_cfg, cfg.family)?;
    let mut buf = CsvBuffer::new(["rank", "simulation", "A", "B", "g", "kh", "distance"])?;
    for (r, ((theta, d), idx)) in abc_out
        .accepted
        .iter()
        .zip(&abc_out.distances)
        .zip(&abc_out.indices)
        .enumerate()
    {
        let mut row = vec![(r + 1).to_string(), idx.to_string()];
        row.extend(theta.iter().map(|v| fmt_f64(*v)));
        row.push(fmt_f64(*d));
        buf.row(row)?;
    }
    save(buf, out_dir, "abc.csv", m)?;
    m.diag("abc.simulation_failures", abc_out.simulation_failures);
    m.diag("abc.weights_v", join(&abc_out.weights_v));
    est.abc = Some(column_means(&abc_out.accepted));

    if cfg.stage.runs(Stage::Fdsa) {
        let log_rows: Vec<Theta> = abc_out
            .accepted
            .iter()
            .map(|t| [t[0], t[1].ln(), t[2], t[3]])
            .collect();
        let theta0 = column_means(&log_rows);
        let mut fcfg = FdsaConfig::new(
            cfg.fdsa_iterations,
            theta0,
            cfg.fdsa_batch_size.min(returns.len()),
            cfg.seed.wrapping_add(1),
        );
        fcfg.log_b = true;
        fcfg.c = cfg.c;
        fcfg.lower = [f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0];
        fcfg.gains = GainSchedule {
            a0: cfg.fdsa_a0,
            c0: cfg.fdsa_c0,
            ..GainSchedule::default()
        };
        let out = fdsa::run_fdsa(returns, &fcfg, cfg.family)?;
        let mut header = vec!["iter"];
        header.extend(THETA_LOG_HEADER);
        header.push("loss_est");
        let mut buf = CsvBuffer::new(header)?;
        for (t, theta) in out.trajectory.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(theta.iter().map(|v| fmt_f64(*v)));
            row.push(out.loss_estimates.get(t).map_or(String::new(), |l| fmt_f64(*l)));
            buf.row(row)?;
        }
        save(buf, out_dir, "fdsa.csv", m)?;
        m.diag("fdsa.theta0", join(&theta0));
        m.diag("fdsa.c0", join(&out.c0));
        m.diag("fdsa.c0_floored", out.c0_floored);
        m.diag("fdsa.boundary_pinches", out.boundary_pinches);
        m.diag("fdsa.infinite_losses", out.infinite_losses);
        let last = out.final_theta();
        est.fdsa = Some(to_natural(&last));

        if cfg.stage.runs(Stage::Mcmc) {
            let (sigma0, fallback) = sigma0_from_trajectory(&out.trajectory);
            m.diag("mcmc.sigma0_diagonal_fallback", fallback);
            let mut mcfg = McmcConfig::new(cfg.mcmc_iterations, last, sigma0, uniform_original_log_b);
            mcfg.log_b = true;
            mcfg.c = cfg.c;
            mcfg.t0 = cfg.mcmc_t0;
            mcfg.epsilon = cfg.mcmc_epsilon;
            let chain = mcmc::run_mcmc(returns, &mcfg, cfg.family, cfg.seed.wrapping_add(2))?;
            let mut header = vec!["iter"];
            header.extend(THETA_LOG_HEADER);
            let mut buf = CsvBuffer::new(header)?;
            for (t, theta) in chain.chain.iter().enumerate() {
                let mut row = vec![t.to_string()];
                row.extend(theta.iter().map(|v| fmt_f64(*v)));
                buf.row(row)?;
            }
            save(buf, out_dir, "mcmc.csv", m)?;
            m.diag("mcmc.acceptance_rate", chain.acceptance_rate());
            m.diag("mcmc.likelihood_failures", chain.likelihood_failures);
            let half = chain.chain.len() / 2;
            let natural: Vec<Theta> = chain.chain[half..].iter().map(to_natural).collect();
            est.mcmc = Some(column_means(&natural));
        }
    }

    write_fit_tables(returns, &est, cfg, out_dir, m)?;
    Ok(est)
}

fn write_fit_tables(
    returns: &[f64],
    est: &Estimates,
    cfg: &AnalyzeConfig,
    out_dir: &Path,
    m: &mut RunManifest,
) -> Result<()> {
    let stages = est.stages();
    let params = stages
        .iter()
        .map(|(_, t)| QdParams::from_theta(cfg.family, t, false, cfg.c))
        .collect::<gk_core::Result<Vec<_>>>()?;

    let mut buf = CsvBuffer::new(["stage", "A", "B", "g", "kh"])?;
    for (name, t) in &stages {
        let mut row = vec![name.to_string()];
        row.extend(t.iter().map(|v| fmt_f64(*v)));
        buf.row(row)?;
    }
    save(buf, out_dir, "estimates.csv", m)?;

    let mut sorted = returns.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let points = 200;
    let mut header = vec!["x".to_owned()];
    header.extend(stages.iter().map(|(n, _)| n.to_string()));

    // Density values that cannot be evaluated (invalid fitted parameters)
    // are left empty rather than failing the whole run.
    let mut buf = CsvBuffer::new(&header)?;
    for i in 0..points {
        let x = if points == 1 || hi == lo {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (points - 1) as f64
        };
        let mut row = vec![fmt_f64(x)];
        row.extend(
            params
                .iter()
                .map(|p| dist::pdf(x, p, false).map_or(String::new(), fmt_f64)),
        );
        buf.row(row)?;
    }
    save(buf, out_dir, "density.csv", m)?;

    header[0] = "empirical".to_owned();
    header.insert(0, "p".to_owned());
    let mut buf = CsvBuffer::new(&header)?;
    let n = sorted.len() as f64;
    for (i, x) in sorted.iter().enumerate() {
        let p = (i as f64 + 0.5) / n;
        let mut row = vec![fmt_f64(p), fmt_f64(*x)];
        row.extend(
            params
                .iter()
                .map(|q| dist::quantile(p, q).map_or(String::new(), fmt_f64)),
        );
        buf.row(row)?;
    }
    save(buf, out_dir, "qq.csv", m)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_order() {
        assert!(Stage::Abc.runs(Stage::Abc));
        assert!(!Stage::Abc.runs(Stage::Fdsa));
        assert!(Stage::Fdsa.runs(Stage::Abc));
        assert!(Stage::All.runs(Stage::Mcmc));
        assert_eq!("mcmc".parse::<Stage>().unwrap(), Stage::Mcmc);
        assert!("x".parse::<Stage>().is_err());
    }

    #[test]
    fn sigma0_window_and_fallback() {
        let traj: Vec<Theta> = (0..3000)
            .map(|i| {
                let t = i as f64;
                [t.sin(), (2.0 * t).cos(), (0.5 * t).sin() * 2.0, 0.3 + 0.01 * (t * 1.7).cos()]
            })
            .collect();
        let (s, fallback) = sigma0_from_trajectory(&traj);
        assert!(!fallback);
        assert_eq!(s, linalg::batch_covariance(&traj[1999..]));

        let flat = vec![[1.0, 2.0, 3.0, 4.0]; 50];
        let (s, fallback) = sigma0_from_trajectory(&flat);
        assert!(fallback);
        assert!(linalg::cholesky(&s).is_some());
    }

    #[test]
    fn uniform_prior_on_original_scale() {
        assert_eq!(uniform_original_log_b(&[0.0, -2.0, 1.0, 0.5]), -2.0);
        assert_eq!(uniform_original_log_b(&[0.0, 0.0, 1.0, -0.1]), f64::NEG_INFINITY);
    }
}
