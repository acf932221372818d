//! Published result tables shipped as CSV, and cell-by-cell comparison.

use serde::{Deserialize, Serialize};

use super::experiment::{Report, ReportRow};
use crate::error::{Error, Result};

const TABLE1: &str = include_str!("../../data/table1.csv");
const TABLE2: &str = include_str!("../../data/table2.csv");
const TABLE3: &str = include_str!("../../data/table3.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    /// Closed-form success probabilities.
    Table1,
    /// Simulated probabilities and fidelities on the `(n, δ)` grid.
    Table2,
    /// Live hardware runs; comparison is informational.
    Table3,
}

impl std::str::FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table1" => Ok(TableId::Table1),
            "table2" => Ok(TableId::Table2),
            "table3" => Ok(TableId::Table3),
            other => Err(Error::Validation(format!("unknown reference table `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub n: u32,
    /// Noise rate for simulated rows, absent for live rows.
    pub delta: Option<f64>,
    /// Error-mitigation label of live rows.
    pub mitigation: Option<String>,
    pub prob: f64,
    pub agf_t: Option<f64>,
    pub pf_t: Option<f64>,
    pub agf_z: Option<f64>,
    pub pf_z: Option<f64>,
}

pub fn reference_rows(table: TableId) -> Result<Vec<ReferenceRow>> {
    let text = match table {
        TableId::Table1 => TABLE1,
        TableId::Table2 => TABLE2,
        TableId::Table3 => TABLE3,
    };
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<std::result::Result<Vec<ReferenceRow>, _>>()?;
    Ok(rows)
}

/// Absolute tolerances per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Closed-form report against closed-form table.
    pub closed_form: f64,
    pub prob_noiseless: f64,
    pub fidelity_noiseless: f64,
    pub prob_noisy: f64,
    pub fidelity_noisy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { closed_form: 5e-6, prob_noiseless: 0.005, fidelity_noiseless: 0.01, prob_noisy: 0.015, fidelity_noisy: 0.03 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiff {
    pub n: u32,
    pub delta: f64,
    pub mitigation: Option<String>,
    pub column: String,
    /// `None` when the report has no value for a cell the table fills.
    pub report: Option<f64>,
    pub reference: f64,
    pub abs_diff: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub table: TableId,
    pub seed: u64,
    pub stamp: String,
    pub informational: bool,
    pub cells: Vec<CellDiff>,
    /// `(n, δ)` of report rows with no counterpart in the table.
    pub unmatched_report_rows: Vec<(u32, f64)>,
    pub max_abs_diff: f64,
    /// `None` for informational comparisons.
    pub pass: Option<bool>,
}

impl DiffReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellDiff> {
        self.cells.iter().filter(|c| c.pass == Some(false))
    }
}

fn columns(r: &ReportRow) -> [(&'static str, Option<f64>); 5] {
    [("prob", Some(r.prob)), ("agf_t", r.agf_t), ("pf_t", r.pf_t), ("agf_z", r.agf_z), ("pf_z", r.pf_z)]
}

fn ref_columns(r: &ReferenceRow) -> [(&'static str, Option<f64>); 5] {
    [("prob", Some(r.prob)), ("agf_t", r.agf_t), ("pf_t", r.pf_t), ("agf_z", r.agf_z), ("pf_z", r.pf_z)]
}

fn same_delta(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

pub fn compare_reference(report: &Report, table: TableId, tol: &Tolerances) -> Result<DiffReport> {
    let reference = reference_rows(table)?;
    let informational = table == TableId::Table3;
    let mut cells = Vec::new();
    let mut unmatched = Vec::new();
    for row in &report.rows {
        let matches: Vec<&ReferenceRow> = reference
            .iter()
            .filter(|r| {
                r.n == row.n
                    && match table {
                        TableId::Table1 => row.delta == 0.0,
                        TableId::Table2 => r.delta.is_some_and(|d| same_delta(d, row.delta)),
                        TableId::Table3 => true,
                    }
            })
            .collect();
        if matches.is_empty() {
            unmatched.push((row.n, row.delta));
        }
        for r in matches {
            for ((column, ours), (_, theirs)) in columns(row).into_iter().zip(ref_columns(r)) {
                let Some(theirs) = theirs else { continue };
                let tolerance = (!informational).then(|| match (table, column == "prob", row.delta == 0.0) {
                    (TableId::Table1, _, _) if report.meta.source == "closed-form" => tol.closed_form,
                    (_, true, true) => tol.prob_noiseless,
                    (_, true, false) => tol.prob_noisy,
                    (_, false, true) => tol.fidelity_noiseless,
                    (_, false, false) => tol.fidelity_noisy,
                });
                let abs_diff = ours.map(|v| (v - theirs).abs());
                let pass = tolerance.map(|t| abs_diff.is_some_and(|d| d <= t));
                cells.push(CellDiff {
                    n: row.n,
                    delta: row.delta,
                    mitigation: r.mitigation.clone(),
                    column: column.to_string(),
                    report: ours,
                    reference: theirs,
                    abs_diff,
                    tolerance,
                    pass,
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::Schema(format!("no report row matches any row of {table:?}")));
    }
    let max_abs_diff = cells.iter().filter_map(|c| c.abs_diff).fold(0.0, f64::max);
    let pass = (!informational).then(|| cells.iter().all(|c| c.pass == Some(true)));
    Ok(DiffReport {
        table,
        seed: report.meta.seed,
        stamp: report.meta.stamp.clone(),
        informational,
        cells,
        unmatched_report_rows: unmatched,
        max_abs_diff,
        pass,
    })
}
