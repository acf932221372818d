use std::io::{BufRead, Write};

use log::{info, warn};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::stamp;
use crate::builder::{build, Branch, Style};
use crate::circuit::{Basis, Circuit};
use crate::error::{Error, Result};
use crate::planner::RotationPlan;
use crate::sim::{run_shots, success_counts, NoiseConvention, NoiseSpec, ShotCounts, SuccessCounts};
use crate::tomography::{ChannelEstimate, ProbeState, TomographyDataset};

pub const REPORT_COLUMNS: [&str; 7] = ["n", "delta", "prob", "agf_t", "pf_t", "agf_z", "pf_z"];

/// One line of a result table. Fidelity columns are empty when a branch had
/// too few shots to reconstruct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: u32,
    pub delta: f64,
    pub prob: f64,
    pub agf_t: Option<f64>,
    pub pf_t: Option<f64>,
    pub agf_z: Option<f64>,
    pub pf_z: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub stamp: String,
    pub theta: f64,
    pub shots: u64,
    pub convention: NoiseConvention,
    pub style: Style,
    pub reduce: bool,
    /// `simulation` or `closed-form`.
    pub source: String,
}

impl ReportMeta {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        ReportMeta {
            seed: cfg.seed,
            stamp: stamp(),
            theta: cfg.theta,
            shots: cfg.shots,
            convention: cfg.convention,
            style: cfg.style,
            reduce: cfg.reduce,
            source: "simulation".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub rows: Vec<ReportRow>,
}

/// Counts of one (input state, basis) circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingCounts {
    pub probe: ProbeState,
    pub basis: Basis,
    pub seed: u64,
    pub counts: ShotCounts,
    pub split: SuccessCounts,
}

/// All twelve settings of one `(n, δ)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingGrid {
    pub plan: RotationPlan,
    pub circuit: Circuit,
    pub delta: f64,
    pub settings: Vec<SettingCounts>,
    pub tomography: TomographyDataset,
}

impl SettingGrid {
    /// Heralded fraction over all twelve settings.
    pub fn success_probability(&self) -> f64 {
        let ok: u64 = self.settings.iter().map(|s| s.split.success).sum();
        let all: u64 = self.settings.iter().map(|s| s.split.shots).sum();
        ok as f64 / all as f64
    }

    /// `None` when the branch has a cell below the tomography threshold.
    pub fn estimate(&self, b: Branch) -> Result<Option<ChannelEstimate>> {
        match self.tomography.estimate(b) {
            Ok(e) => Ok(Some(e)),
            Err(Error::InsufficientData(msg)) => {
                warn!("n={} δ={}: {msg}", self.plan.n, self.delta);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    pub fn row(&self) -> Result<ReportRow> {
        let t = self.estimate(Branch::AppliedTstar)?;
        let z = self.estimate(Branch::AppliedZstar)?;
        Ok(ReportRow {
            n: self.plan.n,
            delta: self.delta,
            prob: self.success_probability(),
            agf_t: t.as_ref().map(|e| e.agf),
            pf_t: t.as_ref().map(|e| e.pf),
            agf_z: z.as_ref().map(|e| e.agf),
            pf_z: z.as_ref().map(|e| e.pf),
        })
    }
}

/// Seed of one circuit run. Depends only on the master seed and the job's
/// own coordinates, so a row does not change when the grid around it does.
pub fn job_seed(master: u64, n: u32, delta: f64, probe: ProbeState, basis: Basis) -> u64 {
    let setting = ProbeState::ALL.iter().position(|&p| p == probe).unwrap() * 3
        + Basis::ALL.iter().position(|&b| b == basis).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ delta.to_bits().rotate_left(29));
    rng.set_stream(((n as u64) << 8) | setting as u64);
    rng.next_u64()
}

/// Run the twelve tomography circuits of `plan` at rate `delta`.
pub fn run_settings(cfg: &ExperimentConfig, plan: &RotationPlan, delta: f64) -> Result<SettingGrid> {
    let circuit = build(plan, cfg.style)?;
    let noise = NoiseSpec::new(delta, cfg.convention);
    noise.validate()?;
    let mut tomography = TomographyDataset::new(cfg.min_shots);
    let mut settings = Vec::with_capacity(12);
    for probe in ProbeState::ALL {
        for basis in Basis::ALL {
            let mut c = circuit.clone();
            c.set_target_state(probe.initial_state());
            c.set_target_basis(basis);
            let seed = job_seed(cfg.seed, plan.n, delta, probe, basis);
            let counts = run_shots(&c, &noise, cfg.shots, seed)?;
            let split = success_counts(&counts, &c)?;
            tomography.add(Branch::AppliedTstar, probe, basis, split.success_target);
            tomography.add(Branch::AppliedZstar, probe, basis, split.failure_target);
            settings.push(SettingCounts { probe, basis, seed, counts, split });
        }
    }
    Ok(SettingGrid { plan: *plan, circuit, delta, settings, tomography })
}

/// Rows in grid order: δ outer, `n` inner.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n.len() * cfg.delta.len());
    for &delta in &cfg.delta {
        for &n in &cfg.n {
            let plan = RotationPlan::from_n(cfg.theta, n, cfg.reduce)?;
            let row = run_settings(cfg, &plan, delta)?.row()?;
            info!("n={n} δ={delta}: P={:.5}", row.prob);
            rows.push(row);
        }
    }
    Ok(Report { meta: ReportMeta::for_config(cfg), rows })
}

/// Closed-form success probabilities with no fidelity columns.
pub fn theory_report(theta: f64, ns: &[u32], reduce: bool) -> Result<Report> {
    let rows = ns
        .iter()
        .map(|&n| {
            let p = RotationPlan::from_n(theta, n, reduce)?;
            Ok(ReportRow { n, delta: 0.0, prob: p.p_success, agf_t: None, pf_t: None, agf_z: None, pf_z: None })
        })
        .collect::<Result<_>>()?;
    let meta = ReportMeta {
        seed: 0,
        stamp: stamp(),
        theta,
        shots: 0,
        convention: NoiseConvention::default(),
        style: Style::default(),
        reduce,
        source: "closed-form".into(),
    };
    Ok(Report { meta, rows })
}

fn convention_name(c: NoiseConvention) -> &'static str {
    match c {
        NoiseConvention::UniformPauli => "uniform-pauli",
        NoiseConvention::MixedState => "mixed-state",
    }
}

fn style_name(s: Style) -> &'static str {
    match s {
        Style::Naive => "naive",
        Style::Simplified => "simplified",
    }
}

/// CSV with `# key=value` header lines.
pub fn write_report(report: &Report, mut out: impl Write) -> Result<()> {
    let m = &report.meta;
    writeln!(out, "# seed={}", m.seed)?;
    writeln!(out, "# stamp={}", m.stamp)?;
    writeln!(out, "# theta={}", m.theta)?;
    writeln!(out, "# shots={}", m.shots)?;
    writeln!(out, "# convention={}", convention_name(m.convention))?;
    writeln!(out, "# style={}", style_name(m.style))?;
    writeln!(out, "# reduce={}", m.reduce)?;
    writeln!(out, "# source={}", m.source)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report(input: impl BufRead) -> Result<Report> {
    let mut meta = ReportMeta {
        seed: 0,
        stamp: String::new(),
        theta: std::f64::consts::FRAC_PI_4,
        shots: 0,
        convention: NoiseConvention::default(),
        style: Style::default(),
        reduce: true,
        source: "simulation".into(),
    };
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        if let Some(h) = line.strip_prefix('#') {
            let Some((k, v)) = h.trim().split_once('=') else { continue };
            let bad = |_| Error::Schema(format!("bad header value `{}`", line.trim()));
            match k.trim() {
                "seed" => meta.seed = v.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                "stamp" => meta.stamp = v.to_string(),
                "theta" => meta.theta = v.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                "shots" => meta.shots = v.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                "convention" => meta.convention = v.parse()?,
                "style" => meta.style = v.parse()?,
                "reduce" => meta.reduce = v.parse().map_err(|e: std::str::ParseBoolError| bad(e.to_string()))?,
                "source" => meta.source = v.to_string(),
                _ => {}
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != REPORT_COLUMNS {
        return Err(Error::Schema(format!("report columns must be {}", REPORT_COLUMNS.join(","))));
    }
    let rows = r.deserialize().collect::<std::result::Result<Vec<ReportRow>, _>>()?;
    Ok(Report { meta, rows })
}
