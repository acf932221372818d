use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::experiment::run_settings;
use crate::builder::Branch;
use crate::circuit::gate_census;
use crate::error::{Error, Result};
use crate::planner::RotationPlan;

/// One register size of the scaling benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: u32,
    pub delta: f64,
    pub k: u64,
    pub qubits: usize,
    pub toffolis: usize,
    pub theta_star: f64,
    pub p_theory: f64,
    pub prob: f64,
    pub pf_t: Option<f64>,
    pub pf_z: Option<f64>,
    /// Wall-clock time of the twelve simulations.
    pub seconds: f64,
}

/// Circuit size and heralded quality for `n = 2..=n_max` at every δ of the
/// config. `k` is not reduced, so every `n` is built as requested.
pub fn benchmark_mode(n_max: u32, cfg: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    if n_max < 2 {
        return Err(Error::Validation(format!("n_max = {n_max}: at least 2 is required")));
    }
    cfg.validate()?;
    let mut rows = Vec::new();
    for &delta in &cfg.delta {
        for n in 2..=n_max {
            let plan = RotationPlan::from_n(cfg.theta, n, false)?;
            let start = Instant::now();
            let grid = run_settings(cfg, &plan, delta)?;
            let seconds = start.elapsed().as_secs_f64();
            rows.push(BenchRow {
                n,
                delta,
                k: plan.k,
                qubits: grid.circuit.num_qubits(),
                toffolis: gate_census(&grid.circuit).toffoli,
                theta_star: plan.theta_star,
                p_theory: plan.p_success,
                prob: grid.success_probability(),
                pf_t: grid.estimate(Branch::AppliedTstar)?.map(|e| e.pf),
                pf_z: grid.estimate(Branch::AppliedZstar)?.map(|e| e.pf),
                seconds,
            });
        }
    }
    Ok(rows)
}

pub fn write_bench_csv(rows: &[BenchRow], seed: u64, mut out: impl Write) -> Result<()> {
    writeln!(out, "# seed={seed}")?;
    writeln!(out, "# stamp={}", super::stamp())?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
