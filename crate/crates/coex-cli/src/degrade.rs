//! The degradation report: how much a multi-technology deployment loses
//! against a single-technology baseline, point by point.
//!
//! Both inputs are sweep tables from `coex run` over the same grid. For each
//! sweep point the report states `100 * (1 - multi / single)` percent for the
//! success probability and the battery lifetime, and the footer repeats the
//! worst (argmax) point of each column.

use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::table::{fmt_float, to_csv, ParsedTable, RunMeta};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradeRow {
    pub sweep_value: f64,
    /// 100·(1 − multi/single) for the success probability; `None` when the
    /// baseline is zero (the ratio is undefined).
    pub success_degradation_pct: Option<f64>,
    /// Same measure for the battery lifetime.
    pub lifetime_degradation_pct: Option<f64>,
}

/// The argmax of one degradation column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub sweep_value: f64,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradeReport {
    pub rows: Vec<DegradeRow>,
    pub argmax_success: Option<Peak>,
    pub argmax_lifetime: Option<Peak>,
}

/// Per-row success probability: the analytic column when present, otherwise
/// the Monte-Carlo estimate.
fn success_values(table: &ParsedTable) -> CliResult<Vec<Option<f64>>> {
    let analytic = table.values("p_sc_analytic")?;
    let mc = table.values("p_sc_mc")?;
    Ok(analytic
        .iter()
        .zip(&mc)
        .map(|(a, m)| a.or(*m))
        .collect())
}

fn ratio_pct(single: Option<f64>, multi: Option<f64>, what: &str, k: usize) -> CliResult<Option<f64>> {
    let (Some(s), Some(m)) = (single, multi) else {
        return Err(CliError::Input(format!(
            "row {} has no {what} value in one of the tables",
            k + 1
        )));
    };
    if s == 0.0 {
        return Ok(None);
    }
    Ok(Some(100.0 * (1.0 - m / s)))
}

fn peak_of(rows: &[DegradeRow], pick: impl Fn(&DegradeRow) -> Option<f64>) -> Option<Peak> {
    rows.iter()
        .filter_map(|r| {
            pick(r)
                .filter(|p| p.is_finite())
                .map(|pct| Peak {
                    sweep_value: r.sweep_value,
                    pct,
                })
        })
        .max_by(|a, b| a.pct.total_cmp(&b.pct))
}

/// Builds the report. Errors when the sweep grids differ or a needed column
/// is absent.
pub fn degradation_report(single: &ParsedTable, multi: &ParsedTable) -> CliResult<DegradeReport> {
    let grid_s = single.values("sweep_value")?;
    let grid_m = multi.values("sweep_value")?;
    if grid_s.len() != grid_m.len() {
        return Err(CliError::Input(format!(
            "mismatched sweep grids: {} vs {} points",
            grid_s.len(),
            grid_m.len()
        )));
    }
    for (k, (a, b)) in grid_s.iter().zip(&grid_m).enumerate() {
        if a != b {
            return Err(CliError::Input(format!(
                "mismatched sweep grids at row {}: {:?} vs {:?}",
                k + 1,
                a,
                b
            )));
        }
    }

    let succ_s = success_values(single)?;
    let succ_m = success_values(multi)?;
    let life_s = single.values("lifetime_s")?;
    let life_m = multi.values("lifetime_s")?;

    let mut rows = Vec::with_capacity(grid_s.len());
    for k in 0..grid_s.len() {
        let sweep_value = grid_s[k].ok_or_else(|| {
            CliError::Input(format!("row {} has an empty sweep_value", k + 1))
        })?;
        rows.push(DegradeRow {
            sweep_value,
            success_degradation_pct: ratio_pct(succ_s[k], succ_m[k], "success", k)?,
            lifetime_degradation_pct: ratio_pct(life_s[k], life_m[k], "lifetime", k)?,
        });
    }

    Ok(DegradeReport {
        argmax_success: peak_of(&rows, |r| r.success_degradation_pct),
        argmax_lifetime: peak_of(&rows, |r| r.lifetime_degradation_pct),
        rows,
    })
}

impl DegradeReport {
    pub fn to_csv(&self, meta: &RunMeta) -> String {
        let cells: Vec<Vec<Option<f64>>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Some(r.sweep_value),
                    r.success_degradation_pct,
                    r.lifetime_degradation_pct,
                ]
            })
            .collect();
        let mut footer = Vec::new();
        if let Some(p) = self.argmax_success {
            footer.push(format!(
                "argmax_success_degradation: sweep_value={}, pct={}",
                fmt_float(p.sweep_value),
                fmt_float(p.pct)
            ));
        }
        if let Some(p) = self.argmax_lifetime {
            footer.push(format!(
                "argmax_lifetime_degradation: sweep_value={}, pct={}",
                fmt_float(p.sweep_value),
                fmt_float(p.pct)
            ));
        }
        to_csv(
            meta,
            "sweep_value,success_degradation_pct,lifetime_degradation_pct",
            &cells,
            &footer,
        )
    }

    pub fn to_json(&self, meta: &RunMeta) -> String {
        #[derive(Serialize)]
        struct Document<'a> {
            meta: std::collections::BTreeMap<&'a str, &'a str>,
            rows: &'a [DegradeRow],
            argmax_success: &'a Option<Peak>,
            argmax_lifetime: &'a Option<Peak>,
        }
        let doc = Document {
            meta: meta
                .entries
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect(),
            rows: &self.rows,
            argmax_success: &self.argmax_success,
            argmax_lifetime: &self.argmax_lifetime,
        };
        let mut text =
            serde_json::to_string_pretty(&doc).expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}
