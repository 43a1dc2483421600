//! Delimited-text ingestion: header-addressed columns, complete-case
//! filtering, mode clamping, and input digests.

use std::path::Path;

use fuzzybeta::{clamp_mode, DesignPair, FuzzyDataset, MODE_CLAMP};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// A fully-read delimited file: header names plus raw string records with
/// their 1-based source line numbers.
pub struct Table {
    pub header: Vec<String>,
    pub records: Vec<csv::StringRecord>,
    pub lines: Vec<u64>,
}

impl Table {
    /// Index of a named column, or a usage error listing what exists.
    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            CliError::usage(format!(
                "column {name:?} not found; file has columns: {}",
                self.header.join(", ")
            ))
        })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }
}

pub fn delimiter_byte(delimiter: char) -> CliResult<u8> {
    if delimiter.is_ascii() && delimiter != '\n' && delimiter != '\r' {
        Ok(delimiter as u8)
    } else {
        Err(CliError::usage(format!(
            "delimiter must be a single ASCII character, got {delimiter:?}"
        )))
    }
}

pub fn read_table(path: &Path, delimiter: char) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter_byte(delimiter)?)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::parse(format!("{}: bad header: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        lines.push(record.position().map_or(0, |p| p.line()));
        records.push(record);
    }
    Ok(Table {
        header,
        records,
        lines,
    })
}

/// SHA-256 of the raw file bytes, hex-encoded.
pub fn sha256_hex(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

enum Cell {
    Missing,
    Number(f64),
}

/// Missing-value markers: empty fields and NA spellings. Anything else must
/// parse as a number.
fn parse_cell(raw: &str, line: u64, column: &str) -> CliResult<Cell> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed.eq_ignore_ascii_case("na") || trimmed.eq_ignore_ascii_case("nan") {
        return Ok(Cell::Missing);
    }
    trimmed
        .parse::<f64>()
        .map(Cell::Number)
        .map_err(|_| {
            CliError::parse(format!(
                "line {line}, column {column:?}: cannot parse {raw:?} as a number"
            ))
        })
}

/// Mode-column policy: clamp into [MODE_CLAMP, 1 − MODE_CLAMP] counting the
/// adjustments, or reject the row with its line number.
pub fn resolve_mode(
    raw: f64,
    line: u64,
    column: &str,
    reject_out_of_range: bool,
    clamped_count: &mut usize,
) -> CliResult<f64> {
    if !raw.is_finite() {
        return Err(CliError::parse(format!(
            "line {line}, column {column:?}: mode {raw} is not finite"
        )));
    }
    let (m, clamped) = clamp_mode(raw);
    if clamped {
        if reject_out_of_range {
            return Err(CliError::parse(format!(
                "line {line}, column {column:?}: mode {raw} outside [{MODE_CLAMP}, {}]",
                1.0 - MODE_CLAMP
            )));
        }
        *clamped_count += 1;
    }
    Ok(m)
}

pub fn resolve_spread(raw: f64, line: u64, column: &str) -> CliResult<f64> {
    if !raw.is_finite() || raw < 0.0 {
        return Err(CliError::parse(format!(
            "line {line}, column {column:?}: spread must be finite and ≥ 0, got {raw}"
        )));
    }
    Ok(raw)
}

/// A model-ready dataset plus the ingestion bookkeeping the reports carry.
pub struct IngestedDataset {
    pub dataset: FuzzyDataset,
    pub n_rows_read: usize,
    pub n_used: usize,
    pub n_dropped_missing: usize,
    pub n_modes_clamped: usize,
}

/// Assemble a fuzzy dataset from named columns. Rows with a missing value
/// in any referenced column are dropped (complete cases); malformed values
/// are hard errors with line numbers.
pub fn build_dataset(
    table: &Table,
    mode_col: &str,
    spread_col: &str,
    mu_covariates: &[String],
    phi_covariates: &[String],
    reject_out_of_range: bool,
) -> CliResult<IngestedDataset> {
    for (label, list) in [("--mu-covariates", mu_covariates), ("--phi-covariates", phi_covariates)] {
        for (i, name) in list.iter().enumerate() {
            if list[..i].contains(name) {
                return Err(CliError::usage(format!(
                    "{label} lists column {name:?} twice"
                )));
            }
        }
    }
    let mode_idx = table.column(mode_col)?;
    let spread_idx = table.column(spread_col)?;
    let mu_idx: Vec<usize> = mu_covariates
        .iter()
        .map(|c| table.column(c))
        .collect::<CliResult<_>>()?;
    let phi_idx: Vec<usize> = phi_covariates
        .iter()
        .map(|c| table.column(c))
        .collect::<CliResult<_>>()?;

    let mut modes = Vec::new();
    let mut spreads = Vec::new();
    let mut mu_cols: Vec<Vec<f64>> = vec![Vec::new(); mu_idx.len()];
    let mut phi_cols: Vec<Vec<f64>> = vec![Vec::new(); phi_idx.len()];
    let mut dropped = 0usize;
    let mut clamped = 0usize;

    'rows: for (record, &line) in table.records.iter().zip(&table.lines) {
        let mut referenced = Vec::with_capacity(2 + mu_idx.len() + phi_idx.len());
        for &idx in std::iter::once(&mode_idx)
            .chain(std::iter::once(&spread_idx))
            .chain(&mu_idx)
            .chain(&phi_idx)
        {
            let raw = record.get(idx).unwrap_or("");
            match parse_cell(raw, line, &table.header[idx])? {
                Cell::Missing => {
                    dropped += 1;
                    continue 'rows;
                }
                Cell::Number(v) => referenced.push(v),
            }
        }
        modes.push(resolve_mode(
            referenced[0],
            line,
            mode_col,
            reject_out_of_range,
            &mut clamped,
        )?);
        spreads.push(resolve_spread(referenced[1], line, spread_col)?);
        for (k, col) in mu_cols.iter_mut().enumerate() {
            col.push(referenced[2 + k]);
        }
        for (k, col) in phi_cols.iter_mut().enumerate() {
            col.push(referenced[2 + mu_idx.len() + k]);
        }
    }

    let n = modes.len();
    if n == 0 {
        return Err(CliError::parse(format!(
            "no usable rows: {} read, {dropped} dropped for missing values",
            table.records.len()
        )));
    }
    let design = DesignPair::with_intercept(n, &mu_cols, &phi_cols)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let dataset = FuzzyDataset::new(modes, spreads, design)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    Ok(IngestedDataset {
        dataset,
        n_rows_read: table.records.len(),
        n_used: n,
        n_dropped_missing: dropped,
        n_modes_clamped: clamped,
    })
}
