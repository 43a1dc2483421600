//! `fuzzybeta`: fit, compare, defuzzify, convert, and simulate
//! variable-dispersion beta regression models for fuzzy ratings data.

mod args;
mod commands;
mod error;
mod ingest;
mod manifest;
mod report;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};
use manifest::RunManifest;

/// Thread count: the --threads flag, else FUZZYBETA_THREADS, else rayon's
/// default (all cores).
fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::usage("--threads must be ≥ 1".to_owned()));
        }
        return Ok(Some(n));
    }
    match std::env::var("FUZZYBETA_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::usage(format!(
                    "FUZZYBETA_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
            if n == 0 {
                return Err(CliError::usage(
                    "FUZZYBETA_THREADS must be ≥ 1".to_owned(),
                ));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn dispatch(command: &Command, argv: &[String]) -> CliResult<()> {
    match command {
        Command::Fit(a) => commands::fit::run(a, argv),
        Command::Compare(a) => commands::compare::run(a, argv),
        Command::Defuzzify(a) => commands::defuzzify::run(a, argv),
        Command::Convert(a) => commands::convert::run(a, argv),
        Command::Simulate(a) => commands::simulate::run(a, argv),
        Command::Rerun(a) => {
            let manifest = RunManifest::load(&a.manifest)?;
            if manifest.artifact_version != manifest::ARTIFACT_VERSION {
                log::warn!(
                    "manifest written by version {}, running {}",
                    manifest.artifact_version,
                    manifest::ARTIFACT_VERSION
                );
            }
            manifest.verify_inputs()?;
            let full_argv: Vec<String> = std::iter::once("fuzzybeta".to_owned())
                .chain(manifest.argv.iter().cloned())
                .collect();
            let cli = Cli::try_parse_from(&full_argv).map_err(|e| {
                CliError::usage(format!(
                    "manifest argument vector does not parse: {e}"
                ))
            })?;
            if matches!(cli.command, Command::Rerun(_)) {
                return Err(CliError::usage(
                    "manifest records a rerun command; refusing to recurse".to_owned(),
                ));
            }
            dispatch(&cli.command, &manifest.argv)
        }
    }
}

fn run() -> CliResult<()> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure {n} threads: {e}")))?;
    }
    dispatch(&cli.command, &argv)
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default())
        .format_timestamp(None)
        .init();
    match run() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
