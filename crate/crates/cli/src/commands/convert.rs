//! `convert`: trapezoidal fuzzy responses → beta fuzzy (mode, spread)
//! columns via the area-matching conversion. The four abscissa columns are
//! replaced by `mode` and `spread`; everything else passes through.

use fuzzybeta::{trapezoid_to_beta, TrapezoidalFuzzyNumber};
use serde_json::json;

use crate::args::ConvertArgs;
use crate::error::{CliError, CliResult};
use crate::ingest::{delimiter_byte, read_table};
use crate::manifest::{input_digest, manifest_path, write_json, RunManifest};

const MAX_REPORTED_ROWS: usize = 10;

pub fn run(args: &ConvertArgs, argv: &[String]) -> CliResult<()> {
    if args.trapezoid_cols.len() != 4 {
        return Err(CliError::usage(format!(
            "--trapezoid-cols needs exactly 4 column names, got {}",
            args.trapezoid_cols.len()
        )));
    }
    let table = read_table(&args.data, args.delimiter)?;
    let idx: Vec<usize> = args
        .trapezoid_cols
        .iter()
        .map(|c| table.column(c))
        .collect::<CliResult<_>>()?;
    if idx.iter().collect::<std::collections::BTreeSet<_>>().len() != 4 {
        return Err(CliError::usage(
            "--trapezoid-cols names the same column twice".to_owned(),
        ));
    }
    let passthrough: Vec<usize> = (0..table.header.len())
        .filter(|i| !idx.contains(i))
        .collect();
    for reserved in ["mode", "spread"] {
        if passthrough
            .iter()
            .any(|&i| table.header[i] == reserved)
        {
            return Err(CliError::usage(format!(
                "output column {reserved:?} collides with an existing column; rename it first"
            )));
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut dropped = 0usize;
    let mut degenerate: Vec<String> = Vec::new();
    'rows: for (record, &line) in table.records.iter().zip(&table.lines) {
        let mut abscissae = [0.0f64; 4];
        for (k, &i) in idx.iter().enumerate() {
            let raw = record.get(i).unwrap_or("").trim();
            if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan")
            {
                dropped += 1;
                continue 'rows;
            }
            abscissae[k] = raw.parse::<f64>().map_err(|_| {
                CliError::parse(format!(
                    "line {line}, column {:?}: cannot parse {raw:?} as a number",
                    table.header[i]
                ))
            })?;
        }
        let [a, b, c, d] = abscissae;
        let converted = TrapezoidalFuzzyNumber::new(a, b, c, d).and_then(|tz| {
            trapezoid_to_beta(&tz)
        });
        match converted {
            Ok(fuzzy) => {
                let mut row: Vec<String> = passthrough
                    .iter()
                    .map(|&i| record.get(i).unwrap_or("").to_owned())
                    .collect();
                row.push(fuzzy.mode().to_string());
                row.push(fuzzy.precision().to_string());
                rows.push(row);
            }
            Err(e) => degenerate.push(format!("line {line}: {e}")),
        }
    }
    if !degenerate.is_empty() {
        let shown = degenerate
            .iter()
            .take(MAX_REPORTED_ROWS)
            .cloned()
            .collect::<Vec<_>>()
            .join("\n  ");
        let suffix = if degenerate.len() > MAX_REPORTED_ROWS {
            format!("\n  … and {} more", degenerate.len() - MAX_REPORTED_ROWS)
        } else {
            String::new()
        };
        return Err(CliError::parse(format!(
            "{} rows could not be converted:\n  {shown}{suffix}",
            degenerate.len()
        )));
    }
    if rows.is_empty() {
        return Err(CliError::parse(format!(
            "no usable rows: {} read, {dropped} dropped for missing values",
            table.records.len()
        )));
    }

    let mut header: Vec<String> = passthrough
        .iter()
        .map(|&i| table.header[i].clone())
        .collect();
    header.push("mode".to_owned());
    header.push("spread".to_owned());
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter_byte(args.delimiter)?)
        .from_path(&args.out)
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", args.out.display())))?;
    writer
        .write_record(&header)
        .and_then(|()| rows.iter().try_for_each(|r| writer.write_record(r)))
        .and_then(|()| writer.flush().map_err(Into::into))
        .map_err(|e| CliError::parse(format!("cannot write {}: {e}", args.out.display())))?;

    println!(
        "Converted {} trapezoid rows to (mode, spread) form ({dropped} dropped for missing values).",
        rows.len()
    );

    if let Some(path) = manifest_path(&args.manifest, &Some(args.out.clone())) {
        let manifest = RunManifest::new(
            "convert",
            argv,
            vec![input_digest(&args.data)?],
            json!({
                "trapezoid_cols": args.trapezoid_cols,
                "delimiter": args.delimiter.to_string(),
            }),
        );
        write_json(&path, &manifest)?;
    }
    Ok(())
}
