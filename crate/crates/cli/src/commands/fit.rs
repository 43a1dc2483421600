//! `fit`: fuzzy-EM regression on a dataset file.

use fuzzybeta::{fit_fuzzy_em, quartiles, FitResult};
use serde_json::json;

use crate::args::FitArgs;
use crate::error::{numerical, CliError, CliResult};
use crate::ingest::{build_dataset, read_table, sha256_hex};
use crate::manifest::{input_digest, manifest_path, write_json, RunManifest, ARTIFACT_VERSION};
use crate::report::{sig6, CoefficientRow, FitReport, ModelSpec, Quartiles, TraceRow};

/// Coefficient rows in concatenated (β, then γ) order, named after their
/// columns.
fn coefficient_rows(spec: &ModelSpec, fit: &FitResult) -> Vec<CoefficientRow> {
    let mut labels: Vec<(String, String)> = Vec::new();
    for (part, covariates) in [("mu", &spec.mu_covariates), ("phi", &spec.phi_covariates)] {
        labels.push((part.to_owned(), "intercept".to_owned()));
        labels.extend(covariates.iter().map(|c| (part.to_owned(), c.clone())));
    }
    let estimates = fit.coefficients.concat();
    labels
        .into_iter()
        .enumerate()
        .map(|(i, (part, name))| CoefficientRow {
            part,
            name,
            estimate: estimates[i],
            std_error: fit.std_errors[i],
        })
        .collect()
}

fn print_human(report: &FitReport) {
    println!("Fuzzy beta regression (EM)");
    println!(
        "Data: {} ({} rows used, {} dropped for missing values, {} modes clamped)",
        report.data_path, report.n_used, report.n_dropped_missing, report.n_modes_clamped
    );
    let describe = |covs: &[String]| {
        if covs.is_empty() {
            "intercept only".to_owned()
        } else {
            format!("intercept + {}", covs.join(" + "))
        }
    };
    println!(
        "Mean submodel (logit link): {}",
        describe(&report.model.mu_covariates)
    );
    println!(
        "Precision submodel (log link): {}",
        describe(&report.model.phi_covariates)
    );
    println!();
    println!("{:<24} {:>14} {:>14}", "coefficient", "estimate", "std.error");
    for row in &report.coefficients {
        println!(
            "{:<24} {:>14} {:>14}",
            format!("{}: {}", row.part, row.name),
            sig6(row.estimate),
            sig6(row.std_error)
        );
    }
    println!();
    let r2 = report
        .pseudo_r2
        .map_or("n/a".to_owned(), sig6);
    println!(
        "Fuzzy log-likelihood: {}   AIC: {}   pseudo-R2: {}",
        sig6(report.loglik),
        sig6(report.aic),
        r2
    );
    let q = &report.residual_quartiles;
    println!(
        "Residual quartiles: Q1 {}   median {}   Q3 {}",
        sig6(q.q1),
        sig6(q.median),
        sig6(q.q3)
    );
    let last_change = report
        .em_trace
        .last()
        .map_or("n/a".to_owned(), |t| sig6(t.max_param_change));
    if report.converged {
        println!(
            "EM converged in {} iterations (final coefficient change {})",
            report.iterations, last_change
        );
    } else {
        println!(
            "EM did NOT converge within {} iterations (final coefficient change {})",
            report.iterations, last_change
        );
    }
}

pub fn run(args: &FitArgs, argv: &[String]) -> CliResult<()> {
    let table = read_table(&args.data, args.delimiter)?;
    let ingested = build_dataset(
        &table,
        &args.mode_col,
        &args.spread_col,
        &args.mu_covariates,
        &args.phi_covariates,
        args.reject_out_of_range,
    )?;
    let em = args.em.to_config(!args.no_pseudo_r2);
    let fit = fit_fuzzy_em(&ingested.dataset, &em).map_err(numerical)?;
    let (q1, median, q3) =
        quartiles(fit.residuals.as_slice()).map_err(numerical)?;

    let spec = ModelSpec {
        mode_col: args.mode_col.clone(),
        spread_col: args.spread_col.clone(),
        mu_covariates: args.mu_covariates.clone(),
        phi_covariates: args.phi_covariates.clone(),
    };
    let report = FitReport {
        artifact_version: ARTIFACT_VERSION.to_owned(),
        data_path: args.data.display().to_string(),
        dataset_digest: sha256_hex(&args.data)?,
        n_rows_read: ingested.n_rows_read,
        n_used: ingested.n_used,
        n_dropped_missing: ingested.n_dropped_missing,
        n_modes_clamped: ingested.n_modes_clamped,
        model: spec.clone(),
        em: serde_json::to_value(&em)
            .map_err(|e| CliError::numerical(format!("cannot serialize EM settings: {e}")))?,
        n_params: ingested.dataset.design().n_params(),
        coefficients: coefficient_rows(&spec, &fit),
        loglik: fit.loglik_fuzzy,
        aic: fit.aic,
        pseudo_r2: fit.pseudo_r2,
        residual_quartiles: Quartiles { q1, median, q3 },
        converged: fit.converged,
        iterations: fit.em_trace.len(),
        em_trace: fit
            .em_trace
            .iter()
            .map(|t| TraceRow {
                loglik: t.loglik,
                max_param_change: t.max_param_change,
            })
            .collect(),
    };

    print_human(&report);
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    if let Some(path) = manifest_path(&args.manifest, &args.out) {
        let manifest = RunManifest::new(
            "fit",
            argv,
            vec![input_digest(&args.data)?],
            json!({
                "model": spec,
                "em": report.em,
                "delimiter": args.delimiter.to_string(),
                "mode_policy": if args.reject_out_of_range { "reject" } else { "clamp" },
            }),
        );
        write_json(&path, &manifest)?;
    }
    Ok(())
}
