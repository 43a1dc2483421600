//! `simulate`: one Monte Carlo estimator-recovery cell, reported as an
//! aligned table plus machine-readable rows.

use fuzzybeta::{run_monte_carlo, Estimator, SimConfig, SimulationReport};
use serde_json::json;

use crate::args::SimulateArgs;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path, write_json, RunManifest, ARTIFACT_VERSION};
use crate::report::{sig6, SimulateOutput, SimulationRow};

fn build_config(args: &SimulateArgs) -> CliResult<SimConfig> {
    let usage = |e: fuzzybeta::Error| CliError::usage(e.to_string());
    let mut cfg = if args.true_beta.is_empty() && args.true_gamma.is_empty() {
        SimConfig::standard(args.n, args.j, args.h, args.b, args.seed).map_err(usage)?
    } else if !args.true_beta.is_empty() && !args.true_gamma.is_empty() {
        let cfg = SimConfig {
            n: args.n,
            j: args.j,
            h: args.h,
            b: args.b,
            seed: args.seed,
            true_beta: args.true_beta.clone(),
            true_gamma: args.true_gamma.clone(),
            gamma_shape: args.gamma_shape,
            gamma_rate: args.gamma_rate,
            gamma_convention: args.gamma_convention,
            estimators: Estimator::ALL.to_vec(),
            em: args.em.to_config(false),
        };
        cfg.validate().map_err(usage)?;
        cfg
    } else {
        return Err(CliError::usage(
            "--true-beta and --true-gamma must be given together (or both omitted)".to_owned(),
        ));
    };
    cfg.gamma_shape = args.gamma_shape;
    cfg.gamma_rate = args.gamma_rate;
    cfg.gamma_convention = args.gamma_convention;
    if !args.estimators.is_empty() {
        cfg.estimators = args.estimators.clone();
    }
    cfg.em = args.em.to_config(false);
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn flatten(report: &SimulationReport) -> Vec<SimulationRow> {
    let mut rows = Vec::new();
    for est in &report.estimators {
        for block in &est.blocks {
            rows.push(SimulationRow {
                estimator: est.estimator.name().to_owned(),
                block: block.block.to_string(),
                bias: block.bias,
                rmse: block.rmse,
                r: block.r,
                p: block.p,
                failures: est.failures,
                non_converged: est.non_converged,
                replications_used: est.replications_used,
            });
        }
        rows.push(SimulationRow {
            estimator: est.estimator.name().to_owned(),
            block: "overall".to_owned(),
            bias: est.overall.bias,
            rmse: est.overall.rmse,
            r: est.overall.r,
            p: est.overall.p,
            failures: est.failures,
            non_converged: est.non_converged,
            replications_used: est.replications_used,
        });
    }
    rows
}

fn print_human(cfg: &SimConfig, rows: &[SimulationRow]) {
    println!(
        "Monte Carlo cell: n={} J={} H={} B={} seed={} (spread law {} {}/{})",
        cfg.n, cfg.j, cfg.h, cfg.b, cfg.seed, cfg.gamma_convention, cfg.gamma_shape, cfg.gamma_rate
    );
    println!();
    println!(
        "{:<13} {:<9} {:>12} {:>12} {:>9} {:>8} {:>9} {:>6}",
        "estimator", "block", "bias", "rmse", "r", "p%", "failures", "used"
    );
    for row in rows {
        println!(
            "{:<13} {:<9} {:>12} {:>12} {:>9} {:>8} {:>9} {:>6}",
            row.estimator,
            row.block,
            sig6(row.bias),
            sig6(row.rmse),
            sig(row.r),
            sig(row.p),
            row.failures,
            row.replications_used
        );
    }
}

/// Shorter rendering for the ratio/percentage columns.
fn sig(x: f64) -> String {
    crate::report::sig(x, 4)
}

pub fn run(args: &SimulateArgs, argv: &[String]) -> CliResult<()> {
    let cfg = build_config(args)?;
    let report = run_monte_carlo(&cfg).map_err(|e| CliError::numerical(e.to_string()))?;
    let rows = flatten(&report);
    print_human(&cfg, &rows);

    let config_echo = serde_json::to_value(&cfg)
        .map_err(|e| CliError::numerical(format!("cannot serialize config: {e}")))?;
    let em_echo = serde_json::to_value(&cfg.em)
        .map_err(|e| CliError::numerical(format!("cannot serialize EM settings: {e}")))?;
    if let Some(out) = &args.out {
        let output = SimulateOutput {
            artifact_version: ARTIFACT_VERSION.to_owned(),
            config: config_echo.clone(),
            em: em_echo.clone(),
            report,
            rows,
        };
        write_json(out, &output)?;
    }
    if let Some(path) = manifest_path(&args.manifest, &args.out) {
        let manifest = RunManifest::new(
            "simulate",
            argv,
            Vec::new(),
            json!({ "sim": config_echo, "em": em_echo }),
        );
        write_json(&path, &manifest)?;
    }
    Ok(())
}
