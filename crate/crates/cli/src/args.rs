use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const SCHEMAS: &str = "\
DATASET CSV
  A header row, then one row per observation. The label column is named `y`
  and holds -1/1 or 0/1 (0 is read as -1). Every other column is a numeric
  feature, in the order the model uses them. Tab-separated files are detected
  from the header. Lines starting with `#` are comments.

NUMERIC TABLES
  Outputs of `losses tabulate`, `simulate`, `boost --diag` and
  `diagnose residuals` start with `# marginloss <version> <command>` and
  `# config <json>` lines echoing the resolved configuration, followed by a
  header row. Floats carry 17 significant digits.

MODEL JSON
  An object tagged by \"kind\":
    linear:   loss {name, dist, weight, k}, model {kind: linear, intercept}
              or {kind: basis_expansion, basis: [...]}, features, beta,
              status, iterations, final_risk, gradient_norm, r_emp, config
    adaboost: features, model {stages: [{theta, stump: {feature, threshold,
              polarity}, weighted_error}], staged_r_emp, status}, r_emp,
              config
  With an intercept, beta[0] is the intercept and beta[j] multiplies
  feature j.

EXIT CODES
  0 success, 2 invalid input or configuration, 3 I/O failure. Failures print
  one JSON line {\"error\", \"kind\", \"exit_code\"} on standard error.";

#[derive(Debug, Parser)]
#[command(name = "marginloss", version, about = "Conformable margin losses, fitting, boosting and residual diagnostics")]
#[command(after_long_help = SCHEMAS)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random draw; `simulate` uses it in place of the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for data-parallel risk evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output format of tables; inferred from the output extension when absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Tsv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate or check a loss function.
    #[command(subcommand)]
    Losses(LossesCommand),
    /// Fit a model by minimizing the empirical risk of a margin loss.
    Fit(FitArgs),
    /// Fit by minimizing the mean of exp(-p v / 2).
    PnormFit(PnormFitArgs),
    /// AdaBoost with decision stumps.
    Boost(BoostArgs),
    /// Draw a synthetic dataset from a JSON generator config.
    Simulate(SimulateArgs),
    /// Residual diagnostics of a fitted model.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
}

#[derive(Debug, Subcommand)]
pub enum LossesCommand {
    /// Write v, phi(v) and phi'(v) on a uniform grid.
    Tabulate(TabulateArgs),
    /// Print the conformability and convexity reports as one JSON line.
    Check(CheckArgs),
}

#[derive(Debug, Subcommand)]
pub enum DiagnoseCommand {
    /// Per-row y_star, f, margin, s, s_squared and per-component ln S^2.
    Residuals(ResidualsArgs),
}

/// A loss given by name, or by CDF and weight.
#[derive(Debug, Clone, Args, Serialize)]
pub struct LossArgs {
    /// exponential, logistic, savage, gaussian[:m], laplace[:m], squared or exp-unit.
    #[arg(long, conflicts_with_all = ["dist", "weight", "k"])]
    pub loss: Option<String>,

    /// logistic, uniform or gaussian.
    #[arg(long, requires = "weight")]
    pub dist: Option<String>,

    /// constant:<c>, likelihood, savage, gauss:<m>, laplace:<m>, buzas2009[:m], semicircle or density.
    #[arg(long, requires = "dist")]
    pub weight: Option<String>,

    /// The loss at a zero margin; defaults to the closed form's natural constant.
    #[arg(long, requires = "dist")]
    pub k: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TabulateArgs {
    #[command(flatten)]
    pub loss: LossArgs,

    /// Margin range `a:b`.
    #[arg(long, default_value = "-5:5", allow_hyphen_values = true)]
    pub range: String,

    #[arg(long, default_value_t = 101)]
    pub points: usize,

    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub loss: LossArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// f(x) = beta'x, plus an intercept with --intercept.
    Linear,
    /// Fixed basis functions read from --basis.
    Basis,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitSettings {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, value_enum, default_value = "linear")]
    pub model: ModelKind,

    /// Add a constant term to the linear model.
    #[arg(long)]
    pub intercept: bool,

    /// JSON array of basis functions for `--model basis`.
    #[arg(long, required_if_eq("model", "basis"))]
    pub basis: Option<PathBuf>,

    /// Stop when the largest gradient coordinate is at most this.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,

    /// Random restarts for non-convex losses.
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,

    /// Coefficient size that declares separable-data divergence.
    #[arg(long, default_value_t = 1e4)]
    pub divergence_threshold: f64,

    /// Model JSON; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub loss: LossArgs,

    #[command(flatten)]
    pub settings: FitSettings,
}

#[derive(Debug, Args)]
pub struct PnormFitArgs {
    /// The exponent p > 0 of the loss exp(-p v / 2).
    #[arg(long)]
    pub p: f64,

    #[command(flatten)]
    pub settings: FitSettings,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoostArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value_t = 100)]
    pub stages: usize,

    /// Stop once the training R_Emp is at or below this level.
    #[arg(long)]
    pub r_emp_stop: Option<f64>,

    /// Model JSON; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Per-stage diagnostics table.
    #[arg(long)]
    pub diag: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Generator config JSON: n, beta0, feature_law, link, contamination, seed.
    #[arg(long)]
    pub config: PathBuf,

    /// Dataset output; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ResidualsArgs {
    /// Model JSON written by `fit`, `pnorm-fit` or `boost`.
    #[arg(long)]
    pub model: PathBuf,

    /// Dataset CSV with the model's feature columns.
    #[arg(long)]
    pub data: PathBuf,

    /// Output table; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
