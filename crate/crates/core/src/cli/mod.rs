//! The `pibt` command-line front end.
//!
//! Data goes to `--output` (or stdout); diagnostics go to stderr. Exit codes:
//! 0 success, 2 input error, 3 degenerate data, 4 singular design.

mod io;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::conditional::{
    fit_conditional_model, split_sample, uniform_confidence_band_with, LinearGaussianMargin, ObservationalSample,
    RegressionCombination,
};
use crate::error::{Arm, PibtError};
use crate::makarov::pibt_bounds_curve;
use crate::rct::{confidence_band, default_delta_grid, linspace, required_sample_size, TwoArmSample};
use crate::regression::FeatureMap;
use crate::simulation::{power_curve_conditional, power_curve_rct, rct_coverage, Scenario};

pub use io::{read_bounds, read_input, read_x_grid, InputTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_SINGULAR: i32 = 4;

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<PibtError> for CliError {
    fn from(e: PibtError) -> Self {
        let code = match e {
            PibtError::InvalidInput(_) => EXIT_INPUT,
            PibtError::DegenerateData(_) | PibtError::DegenerateSplit(_) => EXIT_DEGENERATE,
            PibtError::SingularDesign { .. } => EXIT_SINGULAR,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pibt", version, about = "Bounds on the probability an individual benefits from treatment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plug-in bounds over a threshold grid: delta,lower,upper
    Bounds(BoundsArgs),
    /// Bounds widened by the two-sample margin: delta,lower_clipped,upper_clipped,margin,confidence
    Band(BandArgs),
    /// Smallest design meeting a margin at a confidence level (JSON)
    Power(PowerArgs),
    /// Covariate-conditional band on a query grid, with a JSON margin report
    CondBand(CondBandArgs),
    /// Run a scenario file and write its table
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// A single threshold
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delta_grid")]
    pub delta: Option<f64>,
    /// Equispaced thresholds as min:max:count
    #[arg(long, allow_hyphen_values = true)]
    pub delta_grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub deltas: DeltaArgs,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[command(flatten)]
    pub bounds: BoundsArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub confidence: f64,
    /// n₁/n₀
    #[arg(long, default_value_t = 1.0)]
    pub arm_ratio: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CondBandArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV of query covariates with columns x1..xp
    #[arg(long)]
    pub x_grid: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON margin report (stderr if omitted)
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub degree: u32,
    #[arg(long, default_value_t = 0.5)]
    pub split_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Combine the per-arm regression terms as 2·max instead of their sum
    #[arg(long)]
    pub conservative_max: bool,
    #[command(flatten)]
    pub deltas: DeltaArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON summary (stderr if omitted)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Overrides the scenario's master seed
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `min:max:count`.
pub fn parse_delta_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::input(format!("--delta-grid expects min:max:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 {
        return Err(CliError::input("--delta-grid needs at least one point"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(bad());
    }
    Ok(linspace(lo, hi, count))
}

fn delta_grid(args: &DeltaArgs, fallback: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>, CliError> {
    match (&args.delta, &args.delta_grid) {
        (Some(d), _) => Ok(vec![*d]),
        (None, Some(spec)) => parse_delta_grid(spec),
        (None, None) => Ok(fallback()),
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn two_arm_sample(path: &Path) -> Result<TwoArmSample, CliError> {
    let table = read_input(path)?;
    let treated: Vec<bool> = table.treatments.iter().map(|&a| a == Arm::Treated).collect();
    Ok(TwoArmSample::from_observations(&table.outcomes, &treated)?)
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let sample = two_arm_sample(&args.input)?;
    let grid = delta_grid(&args.deltas, || default_delta_grid(&sample))?;
    let (f1, f0) = sample.ecdfs()?;
    let curve = pibt_bounds_curve(&f1, &f0, &grid)?;
    io::write_csv(
        io::sink(args.output.as_deref())?,
        &["delta", "lower", "upper"],
        curve.iter().map(|p| vec![num(p.delta), num(p.lower), num(p.upper)]),
    )
}

pub fn cmd_band(args: &BandArgs) -> Result<(), CliError> {
    let sample = two_arm_sample(&args.bounds.input)?;
    let grid = delta_grid(&args.bounds.deltas, || default_delta_grid(&sample))?;
    let band = confidence_band(&sample, &grid, args.alpha)?;
    io::write_csv(
        io::sink(args.bounds.output.as_deref())?,
        &["delta", "lower_clipped", "upper_clipped", "margin", "confidence"],
        (0..band.len()).map(|i| {
            vec![
                num(band.delta_grid[i]),
                num(band.lower_clipped(i)),
                num(band.upper_clipped(i)),
                num(band.margin),
                num(band.confidence_level),
            ]
        }),
    )
}

pub fn cmd_power(args: &PowerArgs) -> Result<(), CliError> {
    let plan = required_sample_size(args.epsilon, args.confidence, args.arm_ratio)?;
    let report = json!({
        "epsilon": plan.epsilon,
        "confidence": args.confidence,
        "n0": plan.n0,
        "n1": plan.n1,
        "total": plan.total(),
        "achieved_margin": plan.achieved_margin(),
        "achieved_confidence": plan.achieved_confidence(),
    });
    io::write_json(args.output.as_deref(), &report)
}

/// JSON view of a margin report.
pub fn margin_report(m: &LinearGaussianMargin) -> serde_json::Value {
    let norm = |v: f64| if v.is_finite() { json!(v) } else { json!("inf") };
    json!({
        "alpha": m.alpha,
        "d": m.d,
        "chi2_quantile": m.chi2_quantile,
        "op_norm_control": norm(m.op_norms[0]),
        "op_norm_treated": norm(m.op_norms[1]),
        "arm_term_control": m.arm_terms[0],
        "arm_term_treated": m.arm_terms[1],
        "regression_term": m.regression_term,
        "dkw_term": m.dkw_term,
        "total": m.total,
        "confidence": m.confidence,
        "n0": m.n0,
        "n1": m.n1,
        "combination": match m.combination {
            RegressionCombination::Sum => "sum",
            RegressionCombination::ConservativeMax => "conservative_max",
        },
    })
}

fn write_report(path: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    match path {
        Some(_) => io::write_json(path, value),
        None => {
            eprintln!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
            Ok(())
        }
    }
}

pub fn cmd_cond_band(args: &CondBandArgs) -> Result<(), CliError> {
    let table = read_input(&args.input)?;
    if table.covariate_dim == 0 {
        return Err(CliError::input(format!(
            "{}: conditional bands need covariate columns x1..xp",
            args.input.display()
        )));
    }
    let x_grid = read_x_grid(&args.x_grid)?;
    if let Some(bad) = x_grid.iter().find(|x| x.len() != table.covariate_dim) {
        return Err(CliError::input(format!(
            "query grid has {} covariates, input has {}",
            bad.len(),
            table.covariate_dim
        )));
    }
    let deltas = delta_grid(&args.deltas, || vec![0.0])?;
    let sample = ObservationalSample::new(table.covariates, table.treatments, table.outcomes)?;
    let map = FeatureMap::new(table.covariate_dim, args.degree)?;
    let split = split_sample(&sample, args.split_fraction, args.seed)?;
    let model = fit_conditional_model(&sample, &split, &map)?;
    let combination = if args.conservative_max {
        RegressionCombination::ConservativeMax
    } else {
        RegressionCombination::Sum
    };
    let mut rows = Vec::new();
    let mut margin = None;
    for &delta in &deltas {
        let band = uniform_confidence_band_with(&model, delta, &x_grid, args.alpha, combination)?;
        for i in 0..band.points.len() {
            rows.push(vec![
                (i + 1).to_string(),
                num(delta),
                num(band.lower_clipped(i)),
                num(band.upper_clipped(i)),
            ]);
        }
        margin = Some(band.margin);
    }
    io::write_csv(
        io::sink(args.output.as_deref())?,
        &["x_row_id", "delta", "lower_clipped", "upper_clipped"],
        rows,
    )?;
    write_report(args.report.as_deref(), &margin_report(&margin.expect("δ grid is nonempty")))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.set_seed(seed);
    }
    let out = io::sink(args.output.as_deref())?;
    match scenario {
        Scenario::RctPower(spec) => {
            let curve = power_curve_rct(spec.epsilon, spec.confidence, &spec.n_grid()?)?;
            io::write_csv(
                out,
                &["n", "n0", "n1", "confidence", "meets_target"],
                curve.rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        r.n0.to_string(),
                        r.n1.to_string(),
                        num(r.confidence),
                        (r.confidence >= spec.confidence).to_string(),
                    ]
                }),
            )?;
            let plan = required_sample_size(spec.epsilon, spec.confidence, 1.0)?;
            write_report(
                args.report.as_deref(),
                &json!({
                    "epsilon": curve.epsilon,
                    "target_confidence": curve.target_confidence,
                    "threshold_n": curve.threshold,
                    "continuous_crossing": curve.continuous_crossing,
                    "equal_arm_design": { "n0": plan.n0, "n1": plan.n1, "total": plan.total() },
                }),
            )
        }
        Scenario::ConditionalPower(spec) => {
            let world = spec.scenario()?;
            let rows = power_curve_conditional(
                &world,
                &spec.n_grid,
                spec.alpha,
                spec.replicates,
                spec.split_fraction,
                spec.combination(),
            )?;
            io::write_csv(
                out,
                &[
                    "n",
                    "median_total",
                    "median_regression_term",
                    "median_dkw_term",
                    "singular_replicates",
                    "replicates",
                ],
                rows.iter().map(|r| {
                    vec![
                        r.n.to_string(),
                        num(r.median_total),
                        num(r.median_regression_term),
                        num(r.median_dkw_term),
                        r.singular_replicates.to_string(),
                        r.replicates.to_string(),
                    ]
                }),
            )
        }
        Scenario::RctCoverage(spec) => {
            let world = spec.scenario()?;
            let grid = spec.delta_grid()?;
            let report = rct_coverage(&world, spec.n, &grid, spec.alpha, spec.replicates, spec.n_mc)?;
            io::write_csv(
                out,
                &["delta", "truth", "pointwise_coverage"],
                (0..grid.len()).map(|i| {
                    vec![
                        num(report.delta_grid[i]),
                        num(report.truth[i]),
                        num(report.pointwise_coverage[i]),
                    ]
                }),
            )?;
            write_report(
                args.report.as_deref(),
                &json!({
                    "simultaneous_coverage": report.simultaneous_coverage,
                    "margin": report.margin,
                    "replicates": report.replicates,
                    "exact_truth": report.exact_truth,
                }),
            )
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Band(a) => cmd_band(a),
        Command::Power(a) => cmd_power(a),
        Command::CondBand(a) => cmd_cond_band(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

/// Parses arguments, runs the command, prints any error to stderr and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("pibt: {e}");
            e.code
        }
    }
}
