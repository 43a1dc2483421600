//! `compare`: likelihood-ratio test and AIC delta between two fit reports
//! produced on the same dataset, the null model nested in the full one.

use std::path::Path;

use fuzzybeta::likelihood_ratio_test;
use serde_json::json;

use crate::args::CompareArgs;
use crate::error::{numerical, CliError, CliResult};
use crate::manifest::{input_digest, manifest_path, write_json, RunManifest, ARTIFACT_VERSION};
use crate::report::{sig6, CompareReport, FitReport, ModelSummary};

fn load_report(path: &Path) -> CliResult<FitReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::parse(format!("{}: not a fit report: {e}", path.display())))
}

fn subset(smaller: &[String], larger: &[String]) -> bool {
    smaller.iter().all(|c| larger.contains(c))
}

fn summarize(path: &Path, report: &FitReport) -> ModelSummary {
    ModelSummary {
        path: path.display().to_string(),
        model: report.model.clone(),
        loglik: report.loglik,
        n_params: report.n_params,
        aic: report.aic,
    }
}

pub fn run(args: &CompareArgs, argv: &[String]) -> CliResult<()> {
    let full = load_report(&args.full)?;
    let null = load_report(&args.null)?;

    if full.dataset_digest != null.dataset_digest {
        return Err(CliError::usage(format!(
            "fit reports come from different datasets (digest {} vs {}); \
             refits on the same file are required for a likelihood-ratio test",
            full.dataset_digest, null.dataset_digest
        )));
    }
    if full.model.mode_col != null.model.mode_col
        || full.model.spread_col != null.model.spread_col
    {
        return Err(CliError::usage(
            "fit reports model different response columns; they are not comparable".to_owned(),
        ));
    }
    if !subset(&null.model.mu_covariates, &full.model.mu_covariates)
        || !subset(&null.model.phi_covariates, &full.model.phi_covariates)
    {
        return Err(CliError::usage(
            "the null model's covariate sets are not nested in the full model's".to_owned(),
        ));
    }

    // Identical specifications: the test degenerates (0 on 0 df, p = 1).
    let (statistic, df, p_value) = if full.n_params == null.n_params {
        ((2.0 * (full.loglik - null.loglik)).max(0.0), 0, 1.0)
    } else {
        let lrt = likelihood_ratio_test(full.loglik, full.n_params, null.loglik, null.n_params)
            .map_err(numerical)?;
        (lrt.statistic, lrt.df, lrt.p_value)
    };
    let aic_delta = full.aic - null.aic;
    let verdict = if df == 0 {
        "models are identical; nothing to test".to_owned()
    } else if p_value < 0.05 {
        format!(
            "the additional terms significantly improve fit at the 5% level (p = {})",
            sig6(p_value)
        )
    } else {
        format!(
            "no significant improvement from the additional terms (p = {})",
            sig6(p_value)
        )
    };

    let report = CompareReport {
        artifact_version: ARTIFACT_VERSION.to_owned(),
        dataset_digest: full.dataset_digest.clone(),
        full: summarize(&args.full, &full),
        null: summarize(&args.null, &null),
        statistic,
        df,
        p_value,
        aic_delta,
        verdict,
    };

    println!("Likelihood-ratio test (full vs null)");
    println!(
        "Full: loglik {} with {} parameters (AIC {})",
        sig6(report.full.loglik),
        report.full.n_params,
        sig6(report.full.aic)
    );
    println!(
        "Null: loglik {} with {} parameters (AIC {})",
        sig6(report.null.loglik),
        report.null.n_params,
        sig6(report.null.aic)
    );
    println!(
        "Statistic: {} on {} df, p = {}   AIC delta: {}",
        sig6(report.statistic),
        report.df,
        sig6(report.p_value),
        sig6(report.aic_delta)
    );
    println!("Verdict: {}", report.verdict);

    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    if let Some(path) = manifest_path(&args.manifest, &args.out) {
        let manifest = RunManifest::new(
            "compare",
            argv,
            vec![input_digest(&args.full)?, input_digest(&args.null)?],
            json!({
                "dataset_digest": report.dataset_digest,
                "full": report.full.model,
                "null": report.null.model,
            }),
        );
        write_json(&path, &manifest)?;
    }
    Ok(())
}
