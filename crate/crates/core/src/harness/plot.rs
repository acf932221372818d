//! x/y series for plotting probability and fidelities against `n`.

use serde::{Deserialize, Serialize};

use super::experiment::Report;
use super::fit::{eval_exponential, fit_report};
use crate::error::Result;
use crate::planner::RotationPlan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub delta: f64,
    pub x: Vec<u32>,
    pub y: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub seed: u64,
    pub stamp: String,
    /// Heralded probability per δ, with the fitted exponential for `n ≥ 4`.
    pub probability: Vec<Series>,
    pub pf_t: Vec<Series>,
    pub pf_z: Vec<Series>,
}

pub fn plot_data(report: &Report) -> Result<PlotData> {
    let mut deltas: Vec<f64> = report.rows.iter().map(|r| r.delta).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    // Fits need three points with n ≥ 4; without them only data is plotted.
    let fits = fit_report(report).unwrap_or_default();
    let mut out = PlotData {
        seed: report.meta.seed,
        stamp: report.meta.stamp.clone(),
        probability: Vec::new(),
        pf_t: Vec::new(),
        pf_z: Vec::new(),
    };
    for d in deltas {
        let mut rows: Vec<_> = report.rows.iter().filter(|r| r.delta == d).collect();
        rows.sort_by_key(|r| r.n);
        let x: Vec<u32> = rows.iter().map(|r| r.n).collect();
        let series = |name: &str, y: Vec<Option<f64>>| Series { name: name.into(), delta: d, x: x.clone(), y };
        out.probability.push(series("simulated", rows.iter().map(|r| Some(r.prob)).collect()));
        if let Some(f) = fits.iter().find(|f| f.delta == d) {
            let y = rows
                .iter()
                .map(|r| {
                    let p0 = RotationPlan::from_n(report.meta.theta, r.n, report.meta.reduce)?.p_success;
                    eval_exponential(p0, f.c_delta, r.n).map(Some)
                })
                .collect::<Result<_>>()?;
            out.probability.push(series("fit", y));
        }
        out.pf_t.push(series("simulated", rows.iter().map(|r| r.pf_t).collect()));
        out.pf_z.push(series("simulated", rows.iter().map(|r| r.pf_z).collect()));
    }
    Ok(out)
}
