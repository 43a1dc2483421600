//! Machine-readable report schemas and the 6-significant-digit human
//! formatting used on stdout.

use serde::{Deserialize, Serialize};

/// Render with `digits` significant digits: fixed-point in a readable
/// magnitude band, scientific outside it. Machine outputs never pass
/// through here — they keep full precision.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if magnitude >= digits as i32 || magnitude < -4 {
        format!("{:.*e}", digits - 1, x)
    } else {
        let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

pub fn sig6(x: f64) -> String {
    sig(x, 6)
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct ModelSpec {
    pub mode_col: String,
    pub spread_col: String,
    pub mu_covariates: Vec<String>,
    pub phi_covariates: Vec<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct CoefficientRow {
    /// Submodel: "mu" or "phi".
    pub part: String,
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy)]
pub struct TraceRow {
    pub loglik: f64,
    pub max_param_change: f64,
}

/// The machine-readable contract of `fit`; `compare` consumes two of these.
#[derive(Serialize, Deserialize, Debug)]
pub struct FitReport {
    pub artifact_version: String,
    pub data_path: String,
    pub dataset_digest: String,
    pub n_rows_read: usize,
    pub n_used: usize,
    pub n_dropped_missing: usize,
    pub n_modes_clamped: usize,
    pub model: ModelSpec,
    /// EM settings echo (opaque here; schema owned by the core crate).
    pub em: serde_json::Value,
    pub n_params: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub loglik: f64,
    pub aic: f64,
    pub pseudo_r2: Option<f64>,
    pub residual_quartiles: Quartiles,
    pub converged: bool,
    pub iterations: usize,
    pub em_trace: Vec<TraceRow>,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct ModelSummary {
    pub path: String,
    pub model: ModelSpec,
    pub loglik: f64,
    pub n_params: usize,
    pub aic: f64,
}

#[derive(Serialize, Deserialize, Debug)]
pub struct CompareReport {
    pub artifact_version: String,
    pub dataset_digest: String,
    pub full: ModelSummary,
    pub null: ModelSummary,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub aic_delta: f64,
    pub verdict: String,
}

#[derive(Serialize, Debug)]
pub struct SimulationRow {
    pub estimator: String,
    pub block: String,
    pub bias: f64,
    pub rmse: f64,
    pub r: f64,
    pub p: f64,
    pub failures: usize,
    pub non_converged: usize,
    pub replications_used: usize,
}

#[derive(Serialize, Debug)]
pub struct SimulateOutput {
    pub artifact_version: String,
    pub config: serde_json::Value,
    pub em: serde_json::Value,
    pub report: fuzzybeta::SimulationReport,
    /// One record per estimator × coefficient block (plus overall).
    pub rows: Vec<SimulationRow>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_rendering() {
        assert_eq!(sig6(5.001), "5.00100");
        assert_eq!(sig6(0.0253), "0.0253000");
        assert_eq!(sig6(-121.536), "-121.536");
        assert_eq!(sig6(1234567.0), "1.23457e6");
        assert_eq!(sig6(0.0000123456), "1.23456e-5");
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }
}
