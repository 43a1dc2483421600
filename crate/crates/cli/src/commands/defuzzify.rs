//! `defuzzify`: collapse the fuzzy response to a crisp column. The mode
//! column keeps its name and receives the defuzzified value; the spread
//! column is dropped. Input without the spread column is already crisp and
//! passes through unchanged, making the command idempotent.

use fuzzybeta::BetaFuzzyNumber;
use serde_json::json;

use crate::args::{DefuzzifyArgs, DefuzzifyMethod};
use crate::error::{numerical, CliError, CliResult};
use crate::ingest::{delimiter_byte, read_table, resolve_mode, resolve_spread, Table};
use crate::manifest::{input_digest, manifest_path, write_json, RunManifest};

fn write_rows(
    path: &std::path::Path,
    delimiter: char,
    header: &[String],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter_byte(delimiter)?)
        .from_path(path)
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record(header)
        .and_then(|()| rows.iter().try_for_each(|r| writer.write_record(r)))
        .and_then(|()| writer.flush().map_err(Into::into))
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", path.display())))
}

/// Copy the table through untouched (crisp input).
fn passthrough(args: &DefuzzifyArgs, table: &Table) -> CliResult<()> {
    let rows: Vec<Vec<String>> = table
        .records
        .iter()
        .map(|r| r.iter().map(str::to_owned).collect())
        .collect();
    write_rows(&args.out, args.delimiter, &table.header, &rows)?;
    println!(
        "Column {:?} not present; input is already crisp and was passed through unchanged ({} rows).",
        args.spread_col,
        rows.len()
    );
    Ok(())
}

pub fn run(args: &DefuzzifyArgs, argv: &[String]) -> CliResult<()> {
    let table = read_table(&args.data, args.delimiter)?;
    let crisp_input = !table.has_column(&args.spread_col);
    if crisp_input {
        passthrough(args, &table)?;
    } else {
        let mode_idx = table.column(&args.mode_col)?;
        let spread_idx = table.column(&args.spread_col)?;
        let header: Vec<String> = table
            .header
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != spread_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let mut rows = Vec::new();
        let mut dropped = 0usize;
        let mut clamped = 0usize;
        for (record, &line) in table.records.iter().zip(&table.lines) {
            let raw_mode = record.get(mode_idx).unwrap_or("").trim();
            let raw_spread = record.get(spread_idx).unwrap_or("").trim();
            let missing = |v: &str| {
                v.is_empty() || v.eq_ignore_ascii_case("na") || v.eq_ignore_ascii_case("nan")
            };
            if missing(raw_mode) || missing(raw_spread) {
                dropped += 1;
                continue;
            }
            let parse = |raw: &str, col: &str| {
                raw.parse::<f64>().map_err(|_| {
                    CliError::parse(format!(
                        "line {line}, column {col:?}: cannot parse {raw:?} as a number"
                    ))
                })
            };
            let m = resolve_mode(
                parse(raw_mode, &args.mode_col)?,
                line,
                &args.mode_col,
                args.reject_out_of_range,
                &mut clamped,
            )?;
            let s = resolve_spread(parse(raw_spread, &args.spread_col)?, line, &args.spread_col)?;
            let value = match args.method {
                DefuzzifyMethod::Centroid => BetaFuzzyNumber::new(m, s)
                    .map_err(numerical)?
                    .centroid(),
                DefuzzifyMethod::FirstMax => m,
            };
            let row: Vec<String> = record
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != spread_idx)
                .map(|(i, cell)| {
                    if i == mode_idx {
                        value.to_string()
                    } else {
                        cell.to_owned()
                    }
                })
                .collect();
            rows.push(row);
        }
        write_rows(&args.out, args.delimiter, &header, &rows)?;
        println!(
            "Defuzzified {} rows with the {} method ({dropped} dropped for missing values, {clamped} modes clamped).",
            rows.len(),
            args.method.name()
        );
    }

    if let Some(path) = manifest_path(&args.manifest, &Some(args.out.clone())) {
        let manifest = RunManifest::new(
            "defuzzify",
            argv,
            vec![input_digest(&args.data)?],
            json!({
                "mode_col": args.mode_col,
                "spread_col": args.spread_col,
                "method": args.method.name(),
                "delimiter": args.delimiter.to_string(),
                "mode_policy": if args.reject_out_of_range { "reject" } else { "clamp" },
                "crisp_passthrough": crisp_input,
            }),
        );
        write_json(&path, &manifest)?;
    }
    Ok(())
}
