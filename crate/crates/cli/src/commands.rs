//! Argument definitions and dispatch for the `gk` executable.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gk_core::abc::{self, AbcConfig, UniformBox};
use gk_core::fdsa::{self, FdsaConfig, GainSchedule};
use gk_core::linalg::Mat4;
use gk_core::mcmc::{self, McmcConfig};
use gk_core::summary::SummaryKind;
use gk_core::validity::{self, ValidityStatus};
use gk_core::{dist, rng, Family, QdParams, Theta};

use crate::analyze::{self, join, AnalyzeConfig, Stage};
use crate::bench;
use crate::error::{CliError, Result};
use crate::ingest;
use crate::manifest::{manifest_path_for, RunManifest};
use crate::output::{fmt_f64, CsvBuffer};

#[derive(Debug, Parser)]
#[command(name = "gk", version, about = "g-and-k and g-and-h quantile distributions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantile function at probabilities u.
    #[command(allow_negative_numbers = true)]
    Quantile(QuantileArgs),
    /// Distribution function at points x.
    #[command(allow_negative_numbers = true)]
    Cdf(CdfArgs),
    /// Density at points x.
    #[command(allow_negative_numbers = true)]
    Pdf(PdfArgs),
    /// IID draws by inversion.
    #[command(allow_negative_numbers = true)]
    Sample(SampleArgs),
    /// Validity of (g, k/h) over a grid.
    #[command(allow_negative_numbers = true)]
    ValidityGrid(GridArgs),
    /// Rejection ABC.
    #[command(allow_negative_numbers = true)]
    FitAbc(AbcArgs),
    /// Maximum likelihood by finite-difference stochastic approximation.
    #[command(allow_negative_numbers = true)]
    FitFdsa(FdsaArgs),
    /// Adaptive Metropolis MCMC.
    #[command(allow_negative_numbers = true)]
    FitMcmc(McmcArgs),
    /// Log-return analysis of a price series: ABC, then FDSA, then MCMC.
    #[command(allow_negative_numbers = true)]
    Analyze(AnalyzeArgs),
    /// Time distribution functions against normal baselines.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value = "gk")]
    pub family: Family,
    #[arg(short = 'A', long = "a")]
    pub a: f64,
    #[arg(short = 'B', long = "b")]
    pub b: f64,
    #[arg(short = 'g', long = "g")]
    pub g: f64,
    /// k for g-and-k, h for g-and-h.
    #[arg(long = "kh", visible_aliases = ["k", "h"])]
    pub kh: f64,
    #[arg(long, default_value_t = gk_core::DEFAULT_C)]
    pub c: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<QdParams> {
        Ok(QdParams::with_c(self.family, self.a, self.b, self.g, self.kh, self.c)?)
    }

    fn record(&self, m: &mut RunManifest) {
        m.param("family", self.family);
        m.param("A", fmt_f64(self.a));
        m.param("B", fmt_f64(self.b));
        m.param("g", fmt_f64(self.g));
        m.param("kh", fmt_f64(self.kh));
        m.param("c", fmt_f64(self.c));
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output CSV; stdout when omitted.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json` when --out is given.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

impl OutArgs {
    fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest
            .clone()
            .or_else(|| self.out.as_deref().map(manifest_path_for))
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input values.
    pub values: Vec<f64>,
    /// CSV file with further input values.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column of --input to read; optional for single-column files.
    #[arg(long)]
    pub column: Option<String>,
}

impl InputArgs {
    fn collect(&self) -> Result<Vec<f64>> {
        let mut v = self.values.clone();
        if let Some(path) = &self.input {
            v.extend(ingest::read_column(path, self.column.as_deref())?);
        }
        if v.is_empty() {
            return Err(CliError::usage("no input values given"));
        }
        Ok(v)
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file holding the observations.
    #[arg(long)]
    pub data: PathBuf,
    /// Column to read; optional for single-column files.
    #[arg(long)]
    pub column: Option<String>,
}

impl DataArgs {
    fn load(&self, m: &mut RunManifest) -> Result<Vec<f64>> {
        m.param("data", self.data.display());
        if let Some(c) = &self.column {
            m.param("column", c);
        }
        ingest::read_column(&self.data, self.column.as_deref())
    }
}

#[derive(Debug, Args)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Report the normal score z with Q(z) = x instead of the probability.
    #[arg(long)]
    pub zscale: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub input: InputArgs,
    /// Report the log density.
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, short = 'n')]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value = "gk")]
    pub family: Family,
    #[arg(long, default_value_t = -10.0)]
    pub g_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub g_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub g_step: f64,
    #[arg(long, visible_alias = "h-min", default_value_t = -0.6)]
    pub k_min: f64,
    #[arg(long, visible_alias = "h-max", default_value_t = 0.1)]
    pub k_max: f64,
    #[arg(long, visible_alias = "h-step", default_value_t = 0.01)]
    pub k_step: f64,
    #[arg(long, default_value_t = gk_core::DEFAULT_C)]
    pub c: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AbcArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "gk")]
    pub family: Family,
    /// Total simulations N.
    #[arg(long, default_value_t = 100_000)]
    pub simulations: usize,
    /// Accepted draws M.
    #[arg(long, default_value_t = 200)]
    pub accepted: usize,
    #[arg(long, default_value_t = abc::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    /// Summary statistics: order, octile or moment.
    #[arg(long, default_value = "moment")]
    pub sumstats: SummaryKind,
    /// Lower corner of the uniform prior box, A,B,g,kh.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub prior_lower: Theta,
    /// Upper corner of the uniform prior box, A,B,g,kh.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub prior_upper: Theta,
    #[arg(long, default_value_t = gk_core::DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FdsaArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "gk")]
    pub family: Family,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    /// Subsample size m.
    #[arg(long, default_value_t = 100)]
    pub batch_size: usize,
    /// Step-size scale: one value or four comma-separated values.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gain, default_value = "1")]
    pub a0: Theta,
    /// Perturbation scale: `auto`, one value, or four comma-separated values.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_c0, default_value = "auto")]
    pub c0: C0,
    #[arg(long, default_value_t = fdsa::DEFAULT_C0_REPLICATES)]
    pub c0_replicates: usize,
    #[arg(long, default_value_t = fdsa::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = fdsa::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = fdsa::DEFAULT_STABILITY_OFFSET)]
    pub stability_offset: f64,
    /// Lower bounds, A,B,g,kh (`-inf` allowed).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta, default_value = "-inf,-inf,-inf,-inf")]
    pub lower: Theta,
    /// Upper bounds, A,B,g,kh (`inf` allowed).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta, default_value = "inf,inf,inf,inf")]
    pub upper: Theta,
    /// Work with log B as the second coordinate.
    #[arg(long)]
    pub log_b: bool,
    /// Initial state, A,B,g,kh (B as log B with --log-b).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub theta0: Theta,
    #[arg(long, default_value_t = gk_core::DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C0 {
    Auto,
    Fixed(Theta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PriorKind {
    /// Constant log density.
    Flat,
    /// Uniform on the natural (A, B, g, k/h) with k/h >= 0; adds the log B Jacobian under --log-b.
    Uniform,
}

#[derive(Debug, Args)]
pub struct McmcArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "gk")]
    pub family: Family,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    /// Initial state, A,B,g,kh (B as log B with --log-b).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub theta0: Theta,
    /// Initial proposal covariance: 4 diagonal entries or 16 row-major entries.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_matrix)]
    pub sigma0: Mat4,
    #[arg(long, default_value_t = mcmc::DEFAULT_T0)]
    pub t0: usize,
    #[arg(long, default_value_t = mcmc::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub log_b: bool,
    #[arg(long, value_enum, default_value_t = PriorKind::Uniform)]
    pub prior: PriorKind,
    /// Optional lower corner restricting the prior's support.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub prior_lower: Option<Theta>,
    /// Optional upper corner restricting the prior's support.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub prior_upper: Option<Theta>,
    #[arg(long, default_value_t = gk_core::DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV of prices.
    #[arg(long)]
    pub prices: PathBuf,
    #[arg(long, default_value = ingest::DEFAULT_PRICE_COLUMN)]
    pub price_column: String,
    /// Run the pipeline up to and including this stage.
    #[arg(long, default_value = "all")]
    pub stage: Stage,
    /// Directory for the per-stage CSVs and the manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value = "gk")]
    pub family: Family,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub abc_simulations: Option<usize>,
    #[arg(long)]
    pub abc_accepted: Option<usize>,
    #[arg(long)]
    pub abc_batch_size: Option<usize>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub abc_prior_lower: Option<Theta>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_theta)]
    pub abc_prior_upper: Option<Theta>,
    #[arg(long)]
    pub fdsa_iterations: Option<usize>,
    #[arg(long)]
    pub fdsa_batch_size: Option<usize>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gain)]
    pub fdsa_a0: Option<Theta>,
    /// Scalar, four comma-separated values, or `auto` for the loss-sd estimate [default: 0.01]
    #[arg(long, allow_hyphen_values = true, value_parser = parse_c0)]
    pub fdsa_c0: Option<C0>,
    #[arg(long)]
    pub mcmc_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = bench::DEFAULT_POINTS)]
    pub n_points: usize,
    #[arg(long, default_value_t = bench::DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"))
        })
        .collect()
}

/// Four comma-separated values.
pub fn parse_theta(s: &str) -> std::result::Result<Theta, String> {
    let v = parse_list(s)?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}

/// One value, broadcast, or four comma-separated values.
pub fn parse_gain(s: &str) -> std::result::Result<Theta, String> {
    let v = parse_list(s)?;
    match v.len() {
        1 => Ok([v[0]; 4]),
        4 => Ok([v[0], v[1], v[2], v[3]]),
        n => Err(format!("expected 1 or 4 values, got {n}")),
    }
}

pub fn parse_c0(s: &str) -> std::result::Result<C0, String> {
    if s.trim() == "auto" {
        Ok(C0::Auto)
    } else {
        parse_gain(s).map(C0::Fixed)
    }
}

/// Four diagonal entries or sixteen row-major entries.
pub fn parse_matrix(s: &str) -> std::result::Result<Mat4, String> {
    let v = parse_list(s)?;
    let mut m = [[0.0; 4]; 4];
    match v.len() {
        4 => {
            for i in 0..4 {
                m[i][i] = v[i];
            }
        }
        16 => {
            for (i, x) in v.into_iter().enumerate() {
                m[i / 4][i % 4] = x;
            }
        }
        n => return Err(format!("expected 4 or 16 values, got {n}")),
    }
    Ok(m)
}

fn theta_cells(t: &Theta) -> impl Iterator<Item = String> + '_ {
    t.iter().map(|v| fmt_f64(*v))
}

/// Inclusive arithmetic grid; values are rounded to 10 decimals so that
/// e.g. `-0.6 + 10 * 0.01` is exactly `-0.5`.
pub fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(CliError::usage("grid needs finite min <= max and step > 0"));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((min + i as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

/// Runs one subcommand. `argv` is recorded in the manifest.
pub fn run(cli: Cli, argv: Vec<String>) -> Result<()> {
    match cli.command {
        Command::Quantile(a) => simple(
            "quantile",
            argv,
            &a.out,
            |m| {
                a.params.record(m);
                let p = a.params.params()?;
                let mut buf = CsvBuffer::new(["u", "quantile"])?;
                for u in a.input.collect()? {
                    buf.row([fmt_f64(u), fmt_f64(dist::quantile(u, &p)?)])?;
                }
                Ok(buf)
            },
        ),
        Command::Cdf(a) => simple("cdf", argv, &a.out, |m| {
            a.params.record(m);
            m.param("zscale", a.zscale);
            let p = a.params.params()?;
            let mut buf = CsvBuffer::new(["x", if a.zscale { "z" } else { "cdf" }])?;
            for x in a.input.collect()? {
                let v = if a.zscale {
                    dist::cdf_z(x, &p)?
                } else {
                    dist::cdf(x, &p)?
                };
                buf.row([fmt_f64(x), fmt_f64(v)])?;
            }
            Ok(buf)
        }),
        Command::Pdf(a) => simple("pdf", argv, &a.out, |m| {
            a.params.record(m);
            m.param("log", a.log);
            let p = a.params.params()?;
            let mut buf = CsvBuffer::new(["x", if a.log { "log_pdf" } else { "pdf" }])?;
            for x in a.input.collect()? {
                buf.row([fmt_f64(x), fmt_f64(dist::pdf(x, &p, a.log)?)])?;
            }
            Ok(buf)
        }),
        Command::Sample(a) => simple("sample", argv, &a.out, |m| {
            a.params.record(m);
            m.param("n", a.n);
            m.seed = Some(a.seed);
            let p = a.params.params()?;
            let mut buf = CsvBuffer::new(["x"])?;
            for x in dist::sample(a.n, &p, &mut rng::seeded(a.seed)) {
                buf.row([fmt_f64(x)])?;
            }
            Ok(buf)
        }),
        Command::ValidityGrid(a) => simple("validity-grid", argv, &a.out, |m| validity_grid(&a, m)),
        Command::FitAbc(a) => simple("fit-abc", argv, &a.out, |m| fit_abc(&a, m)),
        Command::FitFdsa(a) => simple("fit-fdsa", argv, &a.out, |m| fit_fdsa(&a, m)),
        Command::FitMcmc(a) => simple("fit-mcmc", argv, &a.out, |m| fit_mcmc(&a, m)),
        Command::Analyze(a) => run_analyze(&a, argv),
        Command::Bench(a) => simple("bench", argv, &a.out, |m| {
            m.param("n_points", a.n_points);
            m.param("repeats", a.repeats);
            m.seed = Some(a.seed);
            let r = bench::run_bench(a.n_points, a.repeats, a.seed)?;
            m.diag("warmup", r.warmup);
            let mut buf = CsvBuffer::new([
                "operation",
                "distribution",
                "n_eval",
                "mean_us",
                "median_us",
                "ratio",
            ])?;
            for row in &r.rows {
                buf.row([
                    row.operation.to_string(),
                    row.target.to_string(),
                    r.n_eval.to_string(),
                    fmt_f64(row.mean_us),
                    fmt_f64(row.median_us),
                    fmt_f64(row.ratio),
                ])?;
            }
            Ok(buf)
        }),
    }
}

/// Single-table commands: build the table, write it, then the manifest.
/// A failed run still writes its manifest, with the error as status.
fn simple<F>(command: &str, argv: Vec<String>, out: &OutArgs, body: F) -> Result<()>
where
    F: FnOnce(&mut RunManifest) -> Result<CsvBuffer>,
{
    let mut m = RunManifest::new(command, argv);
    let result = body(&mut m).and_then(|buf| {
        buf.finish(out.out.as_deref())?;
        if let Some(p) = &out.out {
            m.artifact(p);
        }
        Ok(())
    });
    finish_manifest(&mut m, out.manifest_path().as_deref(), result)
}

fn finish_manifest(m: &mut RunManifest, path: Option<&Path>, result: Result<()>) -> Result<()> {
    if let Err(e) = &result {
        m.status = format!("failed: {e}");
    }
    if let Some(p) = path {
        m.write(p)?;
    }
    result
}

fn validity_grid(a: &GridArgs, m: &mut RunManifest) -> Result<CsvBuffer> {
    m.param("family", a.family);
    m.param("g", format!("{}:{}:{}", a.g_min, a.g_step, a.g_max));
    m.param("kh", format!("{}:{}:{}", a.k_min, a.k_step, a.k_max));
    m.param("c", fmt_f64(a.c));
    let gs = grid(a.g_min, a.g_max, a.g_step)?;
    let ks = grid(a.k_min, a.k_max, a.k_step)?;
    let mut buf = CsvBuffer::new(["g", "kh", "valid", "status", "min_r", "argmin_z"])?;
    let mut failures = 0;
    for &g in &gs {
        for &k in &ks {
            let p = QdParams::with_c(a.family, 0.0, 1.0, g, k, a.c)?;
            let (valid, status, min_r, argmin) =
                match validity::assess(&p, &validity::DEFAULT_INITIAL_Z) {
                    Ok(v) => (
                        v.is_valid(),
                        status_name(v.status),
                        v.min_r.map_or(String::new(), fmt_f64),
                        v.argmin_z.map_or(String::new(), fmt_f64),
                    ),
                    Err(_) => {
                        failures += 1;
                        (false, "numeric_failure", String::new(), String::new())
                    }
                };
            buf.row([
                fmt_f64(g),
                fmt_f64(k),
                valid.to_string(),
                status.to_owned(),
                min_r,
                argmin,
            ])?;
        }
    }
    m.diag("numeric_failures", failures);
    Ok(buf)
}

pub fn status_name(s: ValidityStatus) -> &'static str {
    match s {
        ValidityStatus::ValidTheoretical => "valid_theoretical",
        ValidityStatus::InvalidTheoretical => "invalid_theoretical",
        ValidityStatus::ValidNumerical => "valid_numerical",
        ValidityStatus::InvalidNumerical => "invalid_numerical",
    }
}

fn fit_abc(a: &AbcArgs, m: &mut RunManifest) -> Result<CsvBuffer> {
    let data = a.data.load(m)?;
    m.param("family", a.family);
    m.param("simulations", a.simulations);
    m.param("accepted", a.accepted);
    m.param("batch_size", a.batch_size);
    m.param("sumstats", format!("{:?}", a.sumstats));
    m.param("prior_lower", join(&a.prior_lower));
    m.param("prior_upper", join(&a.prior_upper));
    m.param("c", fmt_f64(a.c));
    m.seed = Some(a.seed);

    let prior = UniformBox::new(a.prior_lower, a.prior_upper)?;
    let mut cfg = AbcConfig::new(a.simulations, a.accepted, a.sumstats, prior, a.seed);
    cfg.batch_size = a.batch_size;
    cfg.c = a.c;
    let out = abc::run_abc(&data, &cfg, a.family)?;
    m.diag("weights_v", join(&out.weights_v));
    m.diag("simulation_failures", out.simulation_failures);

    let mut buf = CsvBuffer::new(["rank", "simulation", "A", "B", "g", "kh", "distance"])?;
    for (r, ((theta, d), idx)) in out
        .accepted
        .iter()
        .zip(&out.distances)
        .zip(&out.indices)
        .enumerate()
    {
        let mut row = vec![(r + 1).to_string(), idx.to_string()];
        row.extend(theta_cells(theta));
        row.push(fmt_f64(*d));
        buf.row(row)?;
    }
    Ok(buf)
}

fn fit_fdsa(a: &FdsaArgs, m: &mut RunManifest) -> Result<CsvBuffer> {
    let data = a.data.load(m)?;
    m.param("family", a.family);
    m.param("iterations", a.iterations);
    m.param("batch_size", a.batch_size);
    m.param("a0", join(&a.a0));
    m.param(
        "c0",
        match a.c0 {
            C0::Auto => "auto".to_owned(),
            C0::Fixed(c) => join(&c),
        },
    );
    m.param("c0_replicates", a.c0_replicates);
    m.param("alpha", fmt_f64(a.alpha));
    m.param("gamma", fmt_f64(a.gamma));
    m.param("stability_offset", fmt_f64(a.stability_offset));
    m.param("lower", join(&a.lower));
    m.param("upper", join(&a.upper));
    m.param("log_b", a.log_b);
    m.param("theta0", join(&a.theta0));
    m.param("c", fmt_f64(a.c));
    m.seed = Some(a.seed);

    let mut cfg = FdsaConfig::new(a.iterations, a.theta0, a.batch_size, a.seed);
    cfg.lower = a.lower;
    cfg.upper = a.upper;
    cfg.log_b = a.log_b;
    cfg.c = a.c;
    cfg.c0_replicates = a.c0_replicates;
    cfg.gains = GainSchedule {
        a0: a.a0,
        c0: match a.c0 {
            C0::Auto => None,
            C0::Fixed(c) => Some(c),
        },
        alpha: a.alpha,
        gamma: a.gamma,
        stability_offset: a.stability_offset,
    };
    let out = fdsa::run_fdsa(&data, &cfg, a.family)?;
    m.diag("c0", join(&out.c0));
    m.diag("c0_floored", out.c0_floored);
    if out.c0_floored {
        eprintln!("warning: loss estimate shows no noise at theta0; c0 floored to {}", fdsa::C0_FLOOR);
    }
    m.diag("boundary_pinches", out.boundary_pinches);
    m.diag("infinite_losses", out.infinite_losses);

    let b_name = if a.log_b { "logB" } else { "B" };
    let mut buf = CsvBuffer::new(["iter", "A", b_name, "g", "kh", "loss_est"])?;
    for (t, theta) in out.trajectory.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(theta_cells(theta));
        row.push(out.loss_estimates.get(t).map_or(String::new(), |l| fmt_f64(*l)));
        buf.row(row)?;
    }
    Ok(buf)
}

fn fit_mcmc(a: &McmcArgs, m: &mut RunManifest) -> Result<CsvBuffer> {
    let data = a.data.load(m)?;
    m.param("family", a.family);
    m.param("iterations", a.iterations);
    m.param("theta0", join(&a.theta0));
    m.param("sigma0", join(a.sigma0.as_flattened()));
    m.param("t0", a.t0);
    m.param("epsilon", fmt_f64(a.epsilon));
    m.param("log_b", a.log_b);
    m.param("prior", format!("{:?}", a.prior).to_lowercase());
    if let Some(lo) = &a.prior_lower {
        m.param("prior_lower", join(lo));
    }
    if let Some(hi) = &a.prior_upper {
        m.param("prior_upper", join(hi));
    }
    m.param("c", fmt_f64(a.c));
    m.seed = Some(a.seed);

    let (lo, hi) = (
        a.prior_lower.unwrap_or([f64::NEG_INFINITY; 4]),
        a.prior_upper.unwrap_or([f64::INFINITY; 4]),
    );
    let (kind, log_b) = (a.prior, a.log_b);
    let log_prior = move |t: &Theta| -> f64 {
        if (0..4).any(|i| t[i] < lo[i] || t[i] > hi[i]) {
            return f64::NEG_INFINITY;
        }
        match kind {
            PriorKind::Flat => 0.0,
            PriorKind::Uniform if log_b => analyze::uniform_original_log_b(t),
            PriorKind::Uniform if t[3] < 0.0 => f64::NEG_INFINITY,
            PriorKind::Uniform => 0.0,
        }
    };
    let mut cfg = McmcConfig::new(a.iterations, a.theta0, a.sigma0, log_prior);
    cfg.t0 = a.t0;
    cfg.epsilon = a.epsilon;
    cfg.log_b = a.log_b;
    cfg.c = a.c;
    let out = mcmc::run_mcmc(&data, &cfg, a.family, a.seed)?;
    m.diag("acceptance_count", out.acceptance_count);
    m.diag("acceptance_rate", out.acceptance_rate());
    m.diag("likelihood_failures", out.likelihood_failures);
    m.diag("final_proposal_cov", join(out.final_proposal_cov.as_flattened()));

    let b_name = if a.log_b { "logB" } else { "B" };
    let mut buf = CsvBuffer::new(["iter", "A", b_name, "g", "kh"])?;
    for (t, theta) in out.chain.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(theta_cells(theta));
        buf.row(row)?;
    }
    Ok(buf)
}

fn run_analyze(a: &AnalyzeArgs, argv: Vec<String>) -> Result<()> {
    let mut m = RunManifest::new("analyze", argv);
    let manifest_path = a.out_dir.join("manifest.json");
    let mut cfg = AnalyzeConfig {
        stage: a.stage,
        family: a.family,
        seed: a.seed,
        ..AnalyzeConfig::default()
    };
    let overrides = [
        (a.abc_simulations, &mut cfg.abc_simulations),
        (a.abc_accepted, &mut cfg.abc_accepted),
        (a.abc_batch_size, &mut cfg.abc_batch_size),
        (a.fdsa_iterations, &mut cfg.fdsa_iterations),
        (a.fdsa_batch_size, &mut cfg.fdsa_batch_size),
        (a.mcmc_iterations, &mut cfg.mcmc_iterations),
    ];
    for (value, slot) in overrides {
        if let Some(v) = value {
            *slot = v;
        }
    }
    if let Some(v) = a.abc_prior_lower {
        cfg.abc_lower = v;
    }
    if let Some(v) = a.abc_prior_upper {
        cfg.abc_upper = v;
    }
    if let Some(v) = a.fdsa_a0 {
        cfg.fdsa_a0 = v;
    }
    match a.fdsa_c0 {
        Some(C0::Fixed(c)) => cfg.fdsa_c0 = Some(c),
        Some(C0::Auto) => cfg.fdsa_c0 = None,
        None => {}
    }
    m.param("prices", a.prices.display());
    m.param("price_column", &a.price_column);
    cfg.record(&mut m);

    let result = std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::io(&a.out_dir, e))
        .and_then(|_| ingest::read_prices(&a.prices, &a.price_column, None))
        .and_then(|series| ingest::log_returns(&series))
        .and_then(|returns| analyze::run_analyze(&returns, &cfg, &a.out_dir, &mut m))
        .map(|_| ());
    if a.out_dir.is_dir() {
        finish_manifest(&mut m, Some(&manifest_path), result)
    } else {
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsers() {
        assert_eq!(parse_theta("1, 2,3,-4").unwrap(), [1.0, 2.0, 3.0, -4.0]);
        assert!(parse_theta("1,2,3").is_err());
        assert_eq!(parse_theta("-inf,0,0,inf").unwrap()[0], f64::NEG_INFINITY);
        assert_eq!(parse_gain("0.5").unwrap(), [0.5; 4]);
        assert!(parse_gain("1,2").is_err());
        assert_eq!(parse_c0("auto").unwrap(), C0::Auto);
        assert_eq!(parse_c0("2").unwrap(), C0::Fixed([2.0; 4]));
        let d = parse_matrix("1,2,3,4").unwrap();
        assert_eq!(d[2][2], 3.0);
        assert_eq!(d[0][1], 0.0);
        let full = parse_matrix(&(0..16).map(|i| i.to_string()).collect::<Vec<_>>().join(",")).unwrap();
        assert_eq!(full[1][2], 6.0);
    }

    #[test]
    fn grid_has_exact_endpoints() {
        let k = grid(-0.6, 0.1, 0.01).unwrap();
        assert_eq!(k.len(), 71);
        assert_eq!(k[10], -0.5);
        assert_eq!(k[60], 0.0);
        assert_eq!(*k.last().unwrap(), 0.1);
        assert_eq!(grid(-10.0, 10.0, 0.1).unwrap().len(), 201);
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }
}
