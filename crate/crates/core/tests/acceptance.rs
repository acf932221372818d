//! Acceptance run. Each criterion prints one `PASS`/`FAIL` line with the
//! measured values; tolerances are fixed below.
//!
//! `cargo test --release -p toffrot --test acceptance -- --nocapture --test-threads 1`

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toffrot::builder::{build, Style};
use toffrot::circuit::{gate_census, Basis, InitialState};
use toffrot::harness::{
    compare_reference, fit_report, predicted_c, reference_rows, run_experiment, write_report, ExperimentConfig, Report,
    ReportRow, TableId, Tolerances,
};
use toffrot::planner::RotationPlan;
use toffrot::qcore::{gates, unitary_choi};
use toffrot::sim::{exact_outcome_distribution, run_exact, run_shots, NoiseConvention, NoiseSpec};
use toffrot::simplify::{pass_halve_tests, reduction_report, simplify};
use toffrot::tomography::{probe_density, process_fidelity, reconstruct_channel, ProbeState};

const NS: [u32; 6] = [2, 4, 5, 6, 7, 8];
const NOISY: [f64; 3] = [0.01, 0.05, 0.1];
const SHOTS: u64 = 100_000;
const SEED: u64 = 20_240_601;

const TABLE1: [f64; 6] = [0.62500, 0.57031, 0.59570, 0.58252, 0.58899, 0.58572];
const TABLE1_TOL: f64 = 5e-6;
const TABLE1_MAX_MS: f64 = 1.0;
const ORACLE_FIDELITY: f64 = 1.0 - 1e-10;
const ORACLE_PROB_TOL: f64 = 1e-10;
const ORACLE_MAX_S: f64 = 10.0;
const PF_DECIMALS_TOL: f64 = 5e-6;
const IDEAL_PROB_TOL: f64 = 0.005;
const IDEAL_FID_TOL: f64 = 0.01;
const AGF_IDENTITY_TOL: f64 = 1e-15;
const NOISY_PROB_TOL: f64 = 0.015;
const NOISY_PF_TOL: f64 = 0.03;
const FIT_R2_MIN: f64 = 0.99;
const FIT_C_TOL: f64 = 0.01;
const FIT_C_PUBLISHED: [f64; 3] = [0.02925, 0.13280, 0.23788];
const PREDICTED_C: [f64; 3] = [0.02940, 0.13550, 0.24400];

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    println!("criterion {id} ({name}): {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn config(delta: Vec<f64>, convention: NoiseConvention) -> ExperimentConfig {
    ExperimentConfig { n: NS.to_vec(), delta, shots: SHOTS, seed: SEED, convention, ..Default::default() }
}

fn mixed_state_grid() -> &'static (Report, f64) {
    static R: OnceLock<(Report, f64)> = OnceLock::new();
    R.get_or_init(|| {
        let t = Instant::now();
        let mut d = vec![0.0];
        d.extend(NOISY);
        let r = run_experiment(&config(d, NoiseConvention::MixedState)).unwrap();
        (r, t.elapsed().as_secs_f64())
    })
}

fn uniform_pauli_grid() -> &'static Report {
    static R: OnceLock<Report> = OnceLock::new();
    R.get_or_init(|| run_experiment(&config(NOISY.to_vec(), NoiseConvention::UniformPauli)).unwrap())
}

fn table2() -> BTreeMap<(u32, u64), ReportRow> {
    reference_rows(TableId::Table2)
        .unwrap()
        .into_iter()
        .map(|r| {
            let d = r.delta.unwrap();
            ((r.n, d.to_bits()), ReportRow {
                n: r.n,
                delta: d,
                prob: r.prob,
                agf_t: r.agf_t,
                pf_t: r.pf_t,
                agf_z: r.agf_z,
                pf_z: r.pf_z,
            })
        })
        .collect()
}

fn row(report: &Report, n: u32, delta: f64) -> ReportRow {
    *report.rows.iter().find(|r| r.n == n && r.delta == delta).expect("grid row")
}

/// Half a unit in the last written digit of `s`.
fn half_ulp(s: &str) -> f64 {
    let mantissa = s.split(['e', 'E']).next().unwrap();
    let exp: i32 = s.split(['e', 'E']).nth(1).map_or(0, |e| e.parse().unwrap());
    let decimals = mantissa.split('.').nth(1).map_or(0, |d| d.len()) as i32;
    0.5 * 10f64.powi(exp - decimals)
}

#[test]
fn criterion_1_table_i() {
    let t = Instant::now();
    let ps: Vec<f64> = NS.iter().map(|&n| RotationPlan::from_n(FRAC_PI_4, n, true).unwrap().p_success).collect();
    let ms = t.elapsed().as_secs_f64() * 1e3;
    let worst = ps.iter().zip(TABLE1).map(|(p, r)| (p - r).abs()).fold(0.0, f64::max);
    let pass = worst <= TABLE1_TOL && ms < TABLE1_MAX_MS;
    verdict(1, "Table I closed form", pass, &format!("max |Δ| = {worst:.2e} (tol {TABLE1_TOL:.0e}), {ms:.4} ms"));
    assert!(pass);
}

#[test]
fn criterion_2_channel_oracle() {
    let t = Instant::now();
    let mut worst_success = 1.0f64;
    let mut worst_failure = 1.0f64;
    let mut worst_prob = 0.0f64;
    let mut worst_table = 0.0f64;
    for (&n, p_ref) in NS.iter().zip(TABLE1) {
        let plan = RotationPlan::from_n(FRAC_PI_4, n, true).unwrap();
        let mut c = build(&plan, Style::Simplified).unwrap();
        c.set_target_state(InitialState::Input);
        let r = gates::rz(plan.theta_star);
        for probe in ProbeState::ALL {
            let psi = probe.initial_state().amplitudes().unwrap();
            let res = run_exact(&c, Some(psi)).unwrap();
            let ok = res.success();
            let want = r.mul_vec(&psi).unwrap();
            worst_success = worst_success.min(ok.target_state.as_ref().unwrap().fidelity_with_pure([want[0], want[1]]));
            worst_prob = worst_prob.max((ok.probability - plan.p_success).abs());
            // The table is rounded to five decimals.
            worst_table = worst_table.max((ok.probability - p_ref).abs());
            let zpsi = [psi[0], -psi[1]];
            for b in res.failures() {
                if let Some(rho) = &b.target_state {
                    worst_failure = worst_failure.min(rho.fidelity_with_pure(zpsi));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst_success >= ORACLE_FIDELITY
        && worst_failure >= ORACLE_FIDELITY
        && worst_prob <= ORACLE_PROB_TOL
        && worst_table <= TABLE1_TOL
        && secs <= ORACLE_MAX_S;
    verdict(
        2,
        "channel oracle",
        pass,
        &format!(
            "min success fidelity 1 - {:.1e}, min failure fidelity 1 - {:.1e}, max |ΔP| = {worst_prob:.1e}, {secs:.2} s",
            1.0 - worst_success,
            1.0 - worst_failure
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_gate_counts() {
    let mut size_ok = true;
    for n in NS {
        let c = build(&RotationPlan::from_n(FRAC_PI_4, n, true).unwrap(), Style::Simplified).unwrap();
        let want = 2 * n as usize - 2;
        size_ok &= gate_census(&c).toffoli == want && c.ancilla_count() == want;
    }
    let plan = RotationPlan::from_n(FRAC_PI_4, 8, true).unwrap();
    let naive = build(&plan, Style::Naive).unwrap();
    let rep = reduction_report(&pass_halve_tests(&naive), &simplify(&naive), &plan).unwrap();
    let dx = rep.delta["x"];
    let dh = rep.delta["h"];
    let pass = size_ok && plan.k == 181 && dx == 30 && dh == 8;
    verdict(
        3,
        "gate counts",
        pass,
        &format!("2n-2 Toffolis and ancillas for all n: {size_ok}; n=8 k={} ΔX = {dx}, ΔH = {dh}", plan.k),
    );
    assert!(pass);
}

#[test]
fn criterion_4_angle_errors() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (n, stated) in [(2, "0.14190"), (4, "0.06786"), (8, "2.579e-4")] {
        let e = RotationPlan::from_n(FRAC_PI_4, n, true).unwrap().angle_error();
        let want: f64 = stated.parse().unwrap();
        let ok = (e - want).abs() <= half_ulp(stated);
        pass &= ok;
        lines.push(format!("n={n} |θ-θ*| = {e:.6e} vs {stated} {}", if ok { "ok" } else { "off" }));
    }
    for (n, want) in [(2, 0.99497), (4, 0.99775)] {
        let plan = RotationPlan::from_n(FRAC_PI_4, n, true).unwrap();
        let closed = 0.5 + 0.5 * (plan.theta - plan.theta_star).cos();
        let choi = process_fidelity(&unitary_choi(&gates::rz(plan.theta_star)).unwrap(), &gates::t()).unwrap();
        let ok = (closed - want).abs() <= PF_DECIMALS_TOL && (choi - closed).abs() < 1e-12;
        pass &= ok;
        lines.push(format!("n={n} PF = {closed:.6} vs {want:.5} {}", if ok { "ok" } else { "off" }));
    }
    verdict(4, "angle errors", pass, &lines.join("; "));
    assert!(pass);
}

#[test]
fn criterion_5_noiseless_rows() {
    let (report, secs) = mixed_state_grid();
    let reference = table2();
    let mut worst_p = 0.0f64;
    let mut worst_f = 0.0f64;
    let mut agf_ok = true;
    let mut complete = true;
    for n in NS {
        let ours = row(report, n, 0.0);
        let theirs = reference[&(n, 0.0f64.to_bits())];
        worst_p = worst_p.max((ours.prob - theirs.prob).abs());
        for (o, t) in [(ours.agf_t, theirs.agf_t), (ours.pf_t, theirs.pf_t), (ours.agf_z, theirs.agf_z), (ours.pf_z, theirs.pf_z)] {
            match o {
                Some(o) => worst_f = worst_f.max((o - t.unwrap()).abs()),
                None => complete = false,
            }
        }
        for (agf, pf) in [(ours.agf_t, ours.pf_t), (ours.agf_z, ours.pf_z)] {
            if let (Some(a), Some(p)) = (agf, pf) {
                agf_ok &= (a - (2.0 * p + 1.0) / 3.0).abs() <= AGF_IDENTITY_TOL;
            }
        }
    }
    let pass = complete && worst_p <= IDEAL_PROB_TOL && worst_f <= IDEAL_FID_TOL && agf_ok;
    verdict(
        5,
        "Table II noiseless rows",
        pass,
        &format!(
            "max |ΔProb| = {worst_p:.4} (tol {IDEAL_PROB_TOL}), max |ΔPF/AGF| = {worst_f:.4} (tol {IDEAL_FID_TOL}), AGF identity {agf_ok}, full grid {secs:.0} s"
        ),
    );
    assert!(pass);
}

struct Cell {
    n: u32,
    delta: f64,
    column: &'static str,
    published: f64,
    mixed: Option<f64>,
    uniform: Option<f64>,
    tol: f64,
}

fn noisy_cells() -> Vec<Cell> {
    let (ms, _) = mixed_state_grid();
    let up = uniform_pauli_grid();
    let reference = table2();
    let mut cells = Vec::new();
    for delta in NOISY {
        for n in NS {
            let t = reference[&(n, delta.to_bits())];
            let a = row(ms, n, delta);
            let b = row(up, n, delta);
            cells.push(Cell { n, delta, column: "prob", published: t.prob, mixed: Some(a.prob), uniform: Some(b.prob), tol: NOISY_PROB_TOL });
            cells.push(Cell { n, delta, column: "pf_t", published: t.pf_t.unwrap(), mixed: a.pf_t, uniform: b.pf_t, tol: NOISY_PF_TOL });
            cells.push(Cell { n, delta, column: "pf_z", published: t.pf_z.unwrap(), mixed: a.pf_z, uniform: b.pf_z, tol: NOISY_PF_TOL });
        }
    }
    cells
}

fn within(v: Option<f64>, target: f64, tol: f64) -> bool {
    v.is_some_and(|v| (v - target).abs() <= tol)
}

#[test]
fn criterion_6_noisy_rows() {
    let cells = noisy_cells();
    let ms_fail: Vec<&Cell> = cells.iter().filter(|c| !within(c.mixed, c.published, c.tol)).collect();
    let up_fail = cells.iter().filter(|c| !within(c.uniform, c.published, c.tol)).count();
    let unbracketed: Vec<&&Cell> = ms_fail
        .iter()
        .filter(|c| match (c.mixed, c.uniform) {
            (Some(a), Some(b)) => !(a.min(b) <= c.published && c.published <= a.max(b)),
            _ => true,
        })
        .collect();
    for c in &ms_fail {
        println!(
            "    n={} δ={} {}: published {:.5}, mixed-state {}, uniform-pauli {}",
            c.n,
            c.delta,
            c.column,
            c.published,
            c.mixed.map_or("-".into(), |v| format!("{v:.5}")),
            c.uniform.map_or("-".into(), |v| format!("{v:.5}")),
        );
    }
    let pass = ms_fail.is_empty() || unbracketed.is_empty();
    verdict(
        6,
        "Table II noisy rows",
        pass,
        &format!(
            "mixed-state: {}/{} cells outside tolerance; uniform-pauli: {up_fail}/{} outside; {} of the mixed-state misses not bracketed by the two conventions",
            ms_fail.len(),
            cells.len(),
            cells.len(),
            unbracketed.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_exponential_fit() {
    let cells = noisy_cells();
    let ms_clean = cells.iter().all(|c| within(c.mixed, c.published, c.tol));
    let up_clean = cells.iter().all(|c| within(c.uniform, c.published, c.tol));
    // The mixed-state run is the designated one unless only uniform-pauli matches.
    let (name, report) = if !ms_clean && up_clean {
        ("uniform-pauli", uniform_pauli_grid())
    } else {
        ("mixed-state", &mixed_state_grid().0)
    };
    let fits = fit_report(report).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for ((delta, published), predicted) in NOISY.iter().zip(FIT_C_PUBLISHED).zip(PREDICTED_C) {
        let f = fits.iter().find(|f| f.delta == *delta).unwrap();
        let ok_fit = f.r_squared >= FIT_R2_MIN && (f.c_delta - published).abs() <= FIT_C_TOL;
        let ok_pred = (predicted_c(*delta) - predicted).abs() <= 5e-6;
        pass &= ok_fit && ok_pred;
        parts.push(format!(
            "δ={delta}: c = {:.5} (published {published}), R² = {:.4}, predicted {:.5}",
            f.c_delta, f.r_squared, f.predicted_c
        ));
    }
    verdict(7, &format!("exponential fit, {name}"), pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_8_property_suites() {
    let mut parts = Vec::new();

    // Rewrite pipeline preserves the heralded channels.
    let mut pipeline = true;
    for n in 2..=5 {
        let plan = RotationPlan::from_n(FRAC_PI_4, n, true).unwrap();
        let mut naive = build(&plan, Style::Naive).unwrap();
        let mut simple = simplify(&naive);
        naive.set_target_state(InitialState::Input);
        simple.set_target_state(InitialState::Input);
        for probe in ProbeState::ALL {
            let psi = probe.initial_state().amplitudes().unwrap();
            let a = run_exact(&naive, Some(psi)).unwrap();
            let b = run_exact(&simple, Some(psi)).unwrap();
            pipeline &= (a.success_probability() - b.success_probability()).abs() < 1e-12;
            let ra = a.success().target_state.clone().unwrap();
            let rb = b.success().target_state.clone().unwrap();
            pipeline &= ra.matrix().max_abs_diff(rb.matrix()) < 1e-10;
        }
    }
    parts.push(format!("pipeline equivalence {pipeline}"));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut closed = true;
    for _ in 0..100 {
        let (a, b): (f64, f64) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let pf = process_fidelity(&unitary_choi(&gates::rz(a)).unwrap(), &gates::rz(b)).unwrap();
        closed &= (pf - (0.5 + 0.5 * (a - b).cos())).abs() < 1e-12;
    }
    parts.push(format!("PF closed form {closed}"));

    let outputs = |f: &dyn Fn(&toffrot::qcore::DensityMatrix1Q) -> toffrot::qcore::DensityMatrix1Q| {
        ProbeState::ALL.map(|p| f(&probe_density(p)))
    };
    let mixed = toffrot::qcore::DensityMatrix1Q::from_bloch(0.0, 0.0, 0.0);
    let id = reconstruct_channel(&outputs(&|r| r.clone())).unwrap();
    let t = reconstruct_channel(&outputs(&|r| r.conjugate_by(&gates::t()).unwrap())).unwrap();
    let dep = reconstruct_channel(&outputs(&|_| mixed.clone())).unwrap();
    let tomo = (process_fidelity(&id, &gates::rz(0.0)).unwrap() - 1.0).abs() < 1e-14
        && (process_fidelity(&t, &gates::t()).unwrap() - 1.0).abs() < 1e-14
        && (process_fidelity(&dep, &gates::t()).unwrap() - 0.25).abs() < 1e-14;
    parts.push(format!("tomography oracles {tomo}"));

    let mut sampling = true;
    for n in [2, 4] {
        let mut c = build(&RotationPlan::from_n(FRAC_PI_4, n, true).unwrap(), Style::Simplified).unwrap();
        c.set_target_state(InitialState::PlusI);
        c.set_target_basis(Basis::X);
        let dist = exact_outcome_distribution(&c, None).unwrap();
        let counts = run_shots(&c, &NoiseSpec::noiseless(), SHOTS, 3).unwrap();
        for (k, p) in dist {
            let f = counts.counts.get(&k).copied().unwrap_or(0) as f64 / SHOTS as f64;
            let sigma = (p * (1.0 - p) / SHOTS as f64).sqrt().max(1.0 / SHOTS as f64);
            sampling &= (f - p).abs() <= 4.0 * sigma;
        }
        sampling &= counts.counts.keys().all(|k| exact_outcome_distribution(&c, None).unwrap().contains_key(k));
    }
    parts.push(format!("trajectory vs exact {sampling}"));

    let cfg = ExperimentConfig { n: vec![2, 5], delta: vec![0.0, 0.05], shots: 5_000, seed: 77, ..Default::default() };
    let csv = |r: &Report| {
        let mut buf = Vec::new();
        write_report(r, &mut buf).unwrap();
        buf
    };
    let rerun = csv(&run_experiment(&cfg).unwrap()) == csv(&run_experiment(&cfg).unwrap());
    parts.push(format!("bit-exact rerun {rerun}"));

    let pass = pipeline && closed && tomo && sampling && rerun;
    verdict(8, "property suites", pass, &parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_9_live_table_informational() {
    let report = &mixed_state_grid().0;
    let d = compare_reference(report, TableId::Table3, &Tolerances::default()).unwrap();
    let cli = std::process::Command::new(env!("CARGO_BIN_EXE_toffrot"))
        .args(["compare", "--reference", "table3", "--report"])
        .arg({
            let dir = std::env::temp_dir().join(format!("toffrot-acceptance-{}", std::process::id()));
            std::fs::create_dir_all(&dir).unwrap();
            let p = dir.join("report.csv");
            let mut buf = Vec::new();
            write_report(report, &mut buf).unwrap();
            std::fs::write(&p, buf).unwrap();
            p
        })
        .output()
        .unwrap();
    let pass = d.informational && d.pass.is_none() && d.cells.iter().all(|c| c.pass.is_none()) && cli.status.success();
    verdict(
        9,
        "Table III informational",
        pass,
        &format!("{} cells compared without a gate, max |Δ| = {:.3}, CLI exit {:?}", d.cells.len(), d.max_abs_diff, cli.status.code()),
    );
    assert!(pass);
}

#[test]
fn half_ulp_reads_written_precision() {
    assert_eq!(half_ulp("0.14190"), 0.5e-5);
    assert!((half_ulp("2.579e-4") - 0.5e-7).abs() < 1e-20);
}
