//! Training-table CSV.
//!
//! Header is `cell_id,col,row,<feature columns...>,<label columns...>`.
//! Label columns are the ones named `pct_no_*` and sit after every
//! feature column. The `col`/`row` pair is derived from `cell_id` for
//! human and GIS use; readers trust `cell_id`.

use std::fmt::Write as _;
use std::path::Path;

use washmap_core::table::TrainingTable;

use crate::error::{CliError, Result};
use crate::format::fmt_f64;

const LABEL_PREFIX: &str = "pct_no_";

pub fn write(path: &Path, table: &TrainingTable, n_cols: usize) -> Result<()> {
    let mut out = String::from("cell_id,col,row");
    for name in table.feature_names().iter().chain(table.label_names()) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for r in 0..table.n_rows() {
        let id = table.cell_ids()[r];
        let _ = write!(out, "{id},{},{}", id % n_cols, id / n_cols);
        for v in table.feature_row(r) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        for k in 0..table.n_labels() {
            out.push(',');
            out.push_str(&fmt_f64(table.label(r, k)));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<TrainingTable> {
    if !path.is_file() {
        return Err(CliError::missing(path, "training table csv"));
    }
    let bad = |line: u64, message: String| CliError::data(path, format!("line {line}: {message}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::data(path, e.to_string()))?;

    let headers = reader.headers().map_err(|e| CliError::data(path, e.to_string()))?;
    let cols: Vec<String> = headers.iter().map(str::to_string).collect();
    if cols.len() < 5 || cols[0] != "cell_id" || cols[1] != "col" || cols[2] != "row" {
        return Err(bad(
            1,
            format!(
                "header must start with 'cell_id,col,row' and carry at least one feature \
                 and one label column, got '{}'",
                cols.join(",")
            ),
        ));
    }
    let mut feature_names: Vec<String> = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    for name in &cols[3..] {
        if name.starts_with(LABEL_PREFIX) {
            label_names.push(name.clone());
        } else if label_names.is_empty() {
            feature_names.push(name.clone());
        } else {
            return Err(bad(1, format!("feature column '{name}' appears after label columns")));
        }
    }
    if feature_names.is_empty() {
        return Err(bad(1, "no feature columns before the pct_no_* labels".into()));
    }
    if label_names.is_empty() {
        return Err(bad(1, "no pct_no_* label columns".into()));
    }
    let mut seen = cols.clone();
    seen.sort();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(bad(1, "duplicate column names".into()));
    }

    let p = feature_names.len();
    let mut cell_ids = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let id: usize = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|_| bad(line, format!("cell_id must be an integer, got '{}'", record.get(0).unwrap_or(""))))?;
        cell_ids.push(id);
        for (k, token) in record.iter().enumerate().skip(3) {
            let v: f64 = token
                .parse()
                .map_err(|_| bad(line, format!("column '{}': expected a number, got '{token}'", cols[k])))?;
            if !v.is_finite() {
                return Err(bad(line, format!("column '{}': non-finite value '{token}'", cols[k])));
            }
            if k - 3 < p {
                features.push(v);
            } else {
                labels.push(v);
            }
        }
    }
    TrainingTable::from_parts(feature_names, label_names, cell_ids, features, labels)
        .map_err(|e| CliError::data(path, e.to_string()))
}
