//! Table rendering and parsing.
//!
//! Tables are CSV with a `#`-prefixed metadata header block (seed, trials,
//! git describe, tool version, flags) followed by a column-name row; the
//! `--json` flag emits the same content as a JSON document whose `rows` field
//! is an array of per-point objects. Neither form contains timestamps or any
//! other run-varying data, so identical invocations produce byte-identical
//! output.
//!
//! Column names carry their units: `delay_s`, `energy_J`, `lifetime_s`.
//! `mc_ci` is one standard error of the Monte-Carlo success estimate. Cells
//! that a mode does not compute are left empty in CSV and `null` in JSON.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Compile-time build stamp; "unknown" outside a git checkout.
pub const GIT_DESCRIBE: &str = env!("GIT_DESCRIBE");
/// Tool version from the package manifest.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The metadata header block: ordered key/value pairs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunMeta {
    pub entries: Vec<(String, String)>,
}

impl RunMeta {
    /// Starts a header with the identification every table carries.
    pub fn new(title: &str) -> Self {
        let mut meta = RunMeta::default();
        meta.push("table", title);
        meta.push("tool_version", TOOL_VERSION);
        meta.push("git_describe", GIT_DESCRIBE);
        meta
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }
}

/// One sweep-point result. `None` marks a column the selected mode does not
/// produce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub sweep_value: f64,
    pub p_sc_analytic: Option<f64>,
    pub p_sc_mc: Option<f64>,
    /// One standard error of `p_sc_mc`.
    pub mc_ci: Option<f64>,
    pub n_tx_mean: Option<f64>,
    pub delay_s: Option<f64>,
    pub energy_j: Option<f64>,
    pub lifetime_s: Option<f64>,
    /// Joint-reception success; present only when `--mrc` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_sc_mrc: Option<f64>,
}

/// Column-name row; `with_mrc` appends the joint-reception column.
pub fn column_header(with_mrc: bool) -> String {
    let mut names = "sweep_value,p_sc_analytic,p_sc_mc,mc_ci,n_tx_mean,delay_s,energy_J,lifetime_s"
        .to_string();
    if with_mrc {
        names.push_str(",p_sc_mrc");
    }
    names
}

/// Formats one float for CSV: shortest decimal that round-trips, switching
/// to exponent notation outside a readable magnitude range. Deterministic —
/// the formatting depends only on the value.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs();
    if (1e-4..1e15).contains(&magnitude) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Renders the CSV form: metadata block, column header, one line per row,
/// optional `#`-prefixed footer lines (e.g. the degradation argmax summary).
pub fn to_csv(meta: &RunMeta, header: &str, rows: &[Vec<Option<f64>>], footer: &[String]) -> String {
    let mut out = String::new();
    for (key, value) in &meta.entries {
        let _ = writeln!(out, "# {key}: {value}");
    }
    let _ = writeln!(out, "{header}");
    for row in rows {
        let line = row.iter().map(|c| fmt_cell(*c)).collect::<Vec<_>>().join(",");
        let _ = writeln!(out, "{line}");
    }
    for line in footer {
        let _ = writeln!(out, "# {line}");
    }
    out
}

/// Renders the sweep table as CSV.
pub fn rows_to_csv(meta: &RunMeta, rows: &[Row], with_mrc: bool) -> String {
    let cells: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                Some(r.sweep_value),
                r.p_sc_analytic,
                r.p_sc_mc,
                r.mc_ci,
                r.n_tx_mean,
                r.delay_s,
                r.energy_j,
                r.lifetime_s,
            ];
            if with_mrc {
                row.push(r.p_sc_mrc);
            }
            row
        })
        .collect();
    to_csv(meta, &column_header(with_mrc), &cells, &[])
}

/// Renders the sweep table as JSON: `{"meta": {...}, "rows": [...]}` with the
/// row objects in sweep order.
pub fn rows_to_json(meta: &RunMeta, rows: &[Row]) -> String {
    #[derive(Serialize)]
    struct Document<'a> {
        meta: std::collections::BTreeMap<&'a str, &'a str>,
        rows: &'a [Row],
    }
    let doc = Document {
        meta: meta
            .entries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect(),
        rows,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("row serialization cannot fail");
    text.push('\n');
    text
}

/// A parsed table: header names and per-row cells (None for empty cells).
#[derive(Debug, Clone)]
pub struct ParsedTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ParsedTable {
    /// Index of a named column.
    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Input(format!("table has no '{name}' column")))
    }

    /// The values of a named column, in row order.
    pub fn values(&self, name: &str) -> CliResult<Vec<Option<f64>>> {
        let idx = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Parses a table produced by [`to_csv`]: `#` lines are skipped, the first
/// remaining line names the columns, every later line is data.
pub fn parse_csv(text: &str) -> CliResult<ParsedTable> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::Input("table is empty".to_string()))?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(CliError::Input(format!(
                "table row {} has {} cells, header has {} columns",
                k + 1,
                cells.len(),
                columns.len()
            )));
        }
        let mut row = Vec::with_capacity(cells.len());
        for (cell, col) in cells.iter().zip(&columns) {
            let cell = cell.trim();
            if cell.is_empty() {
                row.push(None);
            } else {
                let v = cell.parse::<f64>().map_err(|_| {
                    CliError::Input(format!(
                        "table row {} column '{col}': '{cell}' is not a number",
                        k + 1
                    ))
                })?;
                row.push(Some(v));
            }
        }
        rows.push(row);
    }
    Ok(ParsedTable { columns, rows })
}
