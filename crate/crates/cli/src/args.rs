//! Command-line surface: subcommands, flags, and value parsing.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fuzzybeta::{EStepVariant, Estimator, EtaNuConvention, GammaConvention};

#[derive(Parser, Debug)]
#[command(
    name = "fuzzybeta",
    version,
    about = "Variable-dispersion beta regression for fuzzy ratings data",
    propagate_version = true
)]
pub struct Cli {
    /// Worker threads for parallel sections (default: FUZZYBETA_THREADS or
    /// all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit the fuzzy-EM regression model to a dataset.
    Fit(FitArgs),
    /// Likelihood-ratio and AIC comparison of two nested fit reports.
    Compare(CompareArgs),
    /// Replace the fuzzy response by a crisp defuzzified value.
    Defuzzify(DefuzzifyArgs),
    /// Convert trapezoidal fuzzy responses to beta fuzzy (mode, spread) form.
    Convert(ConvertArgs),
    /// Run a Monte Carlo estimator-recovery cell.
    Simulate(SimulateArgs),
    /// Re-execute a command from its run manifest, verifying input digests.
    Rerun(RerunArgs),
}

fn parse_estep(s: &str) -> Result<EStepVariant, fuzzybeta::Error> {
    s.parse()
}

fn parse_convention(s: &str) -> Result<EtaNuConvention, fuzzybeta::Error> {
    s.parse()
}

fn parse_estimator(s: &str) -> Result<Estimator, fuzzybeta::Error> {
    s.parse()
}

fn parse_gamma_convention(s: &str) -> Result<GammaConvention, fuzzybeta::Error> {
    s.parse()
}

/// EM tuning flags shared by `fit` and `simulate`.
#[derive(Args, Debug, Clone)]
pub struct EmArgs {
    /// E-step evaluation of E[ln Y]: taylor or exact-digamma.
    #[arg(long, default_value = "taylor", value_parser = parse_estep)]
    pub estep: EStepVariant,

    /// Conditional-law parameterization: direct or offset.
    #[arg(long = "eta-nu", default_value = "direct", value_parser = parse_convention)]
    pub eta_nu: EtaNuConvention,

    /// EM iteration cap.
    #[arg(long, default_value_t = 500)]
    pub max_em_iterations: usize,

    /// Relative log-likelihood change below which EM may stop.
    #[arg(long, default_value_t = 1e-8)]
    pub loglik_tolerance: f64,

    /// Coefficient change (∞-norm) below which EM may stop.
    #[arg(long, default_value_t = 1e-6)]
    pub param_tolerance: f64,
}

impl EmArgs {
    pub fn to_config(&self, compute_pseudo_r2: bool) -> fuzzybeta::EmConfig {
        fuzzybeta::EmConfig {
            max_em_iterations: self.max_em_iterations,
            loglik_tolerance: self.loglik_tolerance,
            param_tolerance: self.param_tolerance,
            estep_variant: self.estep,
            eta_nu_convention: self.eta_nu,
            solver: fuzzybeta::SolverConfig::default(),
            compute_pseudo_r2,
        }
    }
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Input dataset: delimited text with a header row.
    pub data: PathBuf,

    /// Column holding the fuzzy response modes.
    #[arg(long)]
    pub mode_col: String,

    /// Column holding the fuzzy response spreads (precisions).
    #[arg(long)]
    pub spread_col: String,

    /// Covariate columns for the mean submodel (comma-separated; an
    /// intercept is always included).
    #[arg(long, value_delimiter = ',')]
    pub mu_covariates: Vec<String>,

    /// Covariate columns for the precision submodel (comma-separated; an
    /// intercept is always included, and the submodel is intercept-only when
    /// omitted).
    #[arg(long, value_delimiter = ',')]
    pub phi_covariates: Vec<String>,

    /// Field delimiter of the input file.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Error out on modes outside the clampable range instead of clamping
    /// them.
    #[arg(long)]
    pub reject_out_of_range: bool,

    /// Skip the intercept-only reference fit behind the pseudo-R².
    #[arg(long)]
    pub no_pseudo_r2: bool,

    #[command(flatten)]
    pub em: EmArgs,

    /// Write the machine-readable fit report (JSON) here.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the run manifest here (default: derived from --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Machine-readable fit report of the larger model.
    pub full: PathBuf,

    /// Machine-readable fit report of the nested (restricted) model.
    pub null: PathBuf,

    /// Write the machine-readable comparison (JSON) here.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the run manifest here (default: derived from --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefuzzifyMethod {
    Centroid,
    FirstMax,
}

impl DefuzzifyMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DefuzzifyMethod::Centroid => "centroid",
            DefuzzifyMethod::FirstMax => "first-max",
        }
    }
}

fn parse_method(s: &str) -> Result<DefuzzifyMethod, String> {
    match s {
        "centroid" => Ok(DefuzzifyMethod::Centroid),
        "first-max" => Ok(DefuzzifyMethod::FirstMax),
        other => Err(format!(
            "unknown method {other:?}; expected centroid or first-max"
        )),
    }
}

#[derive(Args, Debug)]
pub struct DefuzzifyArgs {
    /// Input dataset: delimited text with a header row.
    pub data: PathBuf,

    /// Column holding the fuzzy response modes.
    #[arg(long)]
    pub mode_col: String,

    /// Column holding the fuzzy response spreads. When the input has no such
    /// column the data are already crisp and pass through unchanged.
    #[arg(long)]
    pub spread_col: String,

    /// Defuzzification rule.
    #[arg(long, default_value = "centroid", value_parser = parse_method)]
    pub method: DefuzzifyMethod,

    /// Field delimiter of the input (and output) file.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Error out on modes outside the clampable range instead of clamping
    /// them.
    #[arg(long)]
    pub reject_out_of_range: bool,

    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,

    /// Write the run manifest here (default: derived from --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    /// Input dataset: delimited text with a header row.
    pub data: PathBuf,

    /// The four trapezoid abscissa columns, comma-separated in
    /// support-lower, core-lower, core-upper, support-upper order.
    #[arg(long, value_delimiter = ',', required = true)]
    pub trapezoid_cols: Vec<String>,

    /// Field delimiter of the input (and output) file.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// Output CSV path; trapezoid columns are replaced by `mode`, `spread`.
    #[arg(long)]
    pub out: PathBuf,

    /// Write the run manifest here (default: derived from --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Observations per replication.
    #[arg(long)]
    pub n: usize,

    /// Mean-submodel design width (intercept included).
    #[arg(long, default_value_t = 2)]
    pub j: usize,

    /// Precision-submodel design width (intercept included).
    #[arg(long, default_value_t = 1)]
    pub h: usize,

    /// Replication count.
    #[arg(long)]
    pub b: usize,

    /// Master seed; replication r gets an independent stream derived from
    /// (seed, r).
    #[arg(long)]
    pub seed: u64,

    /// True mean-part coefficients (comma-separated; default: built-in
    /// values for j ∈ {2,4}).
    #[arg(long, value_delimiter = ',')]
    pub true_beta: Vec<f64>,

    /// True precision-part coefficients (comma-separated; default: built-in
    /// values for h ∈ {1,3}).
    #[arg(long, value_delimiter = ',')]
    pub true_gamma: Vec<f64>,

    /// Shape of the spread-generating gamma law.
    #[arg(long, default_value_t = 1.025)]
    pub gamma_shape: f64,

    /// Second spread-generation parameter (rate by default).
    #[arg(long, default_value_t = 0.001)]
    pub gamma_rate: f64,

    /// Reading of the second parameter: shape-rate or shape-scale.
    #[arg(long, default_value = "shape-rate", value_parser = parse_gamma_convention)]
    pub gamma_convention: GammaConvention,

    /// Estimators to compare (comma-separated subset of fuzzy-em,
    /// ml-centroid, ml-mode; default: all three).
    #[arg(long, value_delimiter = ',', value_parser = parse_estimator)]
    pub estimators: Vec<Estimator>,

    #[command(flatten)]
    pub em: EmArgs,

    /// Write the machine-readable report (JSON) here.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Write the run manifest here (default: derived from --out).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    /// Run manifest written by a previous command.
    pub manifest: PathBuf,
}
