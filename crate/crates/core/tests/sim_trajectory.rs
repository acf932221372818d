//! Trajectory sampling against exact and density-matrix references.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use toffrot::builder::{build, Style};
use toffrot::circuit::{to_unitary, Basis, Circuit, Gate, InitialState, QubitRole};
use toffrot::planner::RotationPlan;
use toffrot::qcore::{CMatrix, C64};
use toffrot::sim::*;

fn rotation(n: u32) -> Circuit {
    build(&RotationPlan::from_n(FRAC_PI_4, n, true).unwrap(), Style::Simplified).unwrap()
}

fn within_4_sigma(p: f64, count: u64, shots: u64) -> bool {
    let sigma = (p * (1.0 - p) / shots as f64).sqrt().max(1.0 / shots as f64);
    (count as f64 / shots as f64 - p).abs() <= 4.0 * sigma
}

fn assert_distribution(dist: &BTreeMap<u64, f64>, counts: &ShotCounts) {
    for (&k, &p) in dist {
        let c = counts.counts.get(&k).copied().unwrap_or(0);
        assert!(within_4_sigma(p, c, counts.shots), "outcome {k:b}: p = {p}, count = {c}/{}", counts.shots);
    }
    for (&k, &c) in &counts.counts {
        assert!(dist.get(&k).copied().unwrap_or(0.0) > 0.0 || c == 0, "impossible outcome {k:b} seen {c} times");
    }
}

/// Density-matrix evolution with the same noise placement as the sampler.
fn density_reference(c: &Circuit, noise: &NoiseSpec) -> BTreeMap<u64, f64> {
    let nq = c.num_qubits();
    let dim = 1 << nq;
    let mut psi = vec![C64::new(1.0, 0.0)];
    for spec in c.qubits.iter().rev() {
        let a = spec.init.amplitudes().unwrap();
        psi = psi.iter().flat_map(|&x| [x * a[0], x * a[1]]).collect();
    }
    let mut rho = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            rho[(i, j)] = psi[i] * psi[j].conj();
        }
    }
    let single = |g: Gate| {
        let mut one = Circuit { qubits: c.qubits.clone(), gates: vec![g], measurements: vec![] };
        one.qubits.iter_mut().for_each(|q| q.init = InitialState::Zero);
        to_unitary(&one).unwrap()
    };
    let conj = |rho: &CMatrix, u: &CMatrix| u.matmul(rho).unwrap().matmul(&u.adjoint()).unwrap();
    let p = noise.pauli_rate();
    let depolarize = |rho: CMatrix, q: usize| {
        let x = single(Gate::X(q));
        let z = single(Gate::Z(q));
        let y = x.matmul(&z).unwrap();
        let mut out = rho.scale(C64::new(1.0 - p, 0.0));
        for m in [&x, &y, &z] {
            out = out.add(&conj(&rho, m).scale(C64::new(p / 3.0, 0.0))).unwrap();
        }
        out
    };
    let apply = |rho: CMatrix, g: Gate| {
        let mut r = conj(&rho, &single(g));
        if noise.apply_at_gates {
            for q in g.qubits() {
                r = depolarize(r, q);
            }
        }
        r
    };
    for &g in &c.gates {
        rho = apply(rho, g);
    }
    for m in &c.measurements {
        for g in m.basis.change_gates(m.qubit) {
            rho = apply(rho, g);
        }
        if noise.apply_at_measure {
            rho = depolarize(rho, m.qubit);
        }
    }
    let mut dist = BTreeMap::new();
    for i in 0..dim {
        let key: u64 = c.measurements.iter().enumerate().map(|(pos, m)| (((i >> m.qubit) & 1) as u64) << pos).sum();
        *dist.entry(key).or_insert(0.0) += rho[(i, i)].re;
    }
    dist
}

#[test]
fn noiseless_shots_follow_exact_distribution() {
    for n in [2, 4] {
        for init in [InitialState::Zero, InitialState::Plus] {
            for basis in Basis::ALL {
                let mut c = rotation(n);
                c.set_target_state(init);
                c.set_target_basis(basis);
                let dist = exact_outcome_distribution(&c, None).unwrap();
                let counts = run_shots(&c, &NoiseSpec::noiseless(), 100_000, 11).unwrap();
                assert_distribution(&dist, &counts);
            }
        }
    }
}

#[test]
fn noisy_shots_follow_density_matrix_reference() {
    for n in [2, 4] {
        for convention in [NoiseConvention::UniformPauli, NoiseConvention::MixedState] {
            let mut c = rotation(n);
            c.set_target_state(InitialState::PlusI);
            c.set_target_basis(Basis::X);
            let noise = NoiseSpec::new(0.1, convention);
            let counts = run_shots(&c, &noise, 100_000, 5).unwrap();
            assert_distribution(&density_reference(&c, &noise), &counts);
        }
    }
    let mut c = rotation(2);
    let noise = NoiseSpec { apply_at_measure: false, ..NoiseSpec::new(0.2, NoiseConvention::UniformPauli) };
    let counts = run_shots(&c, &noise, 100_000, 6).unwrap();
    assert_distribution(&density_reference(&c, &noise), &counts);
    c.set_target_basis(Basis::Y);
    let noise = NoiseSpec { apply_at_gates: false, ..NoiseSpec::new(0.2, NoiseConvention::MixedState) };
    let counts = run_shots(&c, &noise, 100_000, 7).unwrap();
    assert_distribution(&density_reference(&c, &noise), &counts);
}

fn z_expectation(counts: &ShotCounts) -> f64 {
    let ones: u64 = counts.counts.iter().filter(|(&k, _)| k & 1 == 1).map(|(_, &v)| v).sum();
    1.0 - 2.0 * ones as f64 / counts.shots as f64
}

#[test]
fn noisy_identity_matches_channel() {
    let mut c = Circuit::new();
    let t = c.add_qubit(QubitRole::Target, InitialState::Zero);
    c.push(Gate::Z(t)).measure(t, Basis::Z);
    let shots = 100_000;
    for delta in [0.05, 0.3] {
        // X and Y flip Z: UniformPauli has flip rate 2δ/3, MixedState δ/2.
        for (convention, expect) in
            [(NoiseConvention::UniformPauli, 1.0 - 4.0 * delta / 3.0), (NoiseConvention::MixedState, 1.0 - delta)]
        {
            let noise = NoiseSpec { apply_at_measure: false, ..NoiseSpec::new(delta, convention) };
            let z = z_expectation(&run_shots(&c, &noise, shots, 3).unwrap());
            let sigma = ((1.0 - expect * expect) / shots as f64).sqrt();
            assert!((z - expect).abs() <= 4.0 * sigma, "{convention:?} δ={delta}: {z} vs {expect}");
        }
    }
}

#[test]
fn fully_depolarized_target_averages_out() {
    let mut c = rotation(2);
    c.set_target_state(InitialState::Zero);
    let noise = NoiseSpec::new(1.0, NoiseConvention::UniformPauli);
    let counts = run_shots(&c, &noise, 100_000, 21).unwrap();
    assert!(z_target(&c, &counts).abs() <= 0.02);
}

fn z_target(c: &Circuit, counts: &ShotCounts) -> f64 {
    let pos = counts.measured.iter().position(|&q| Some(q) == c.target()).unwrap();
    let ones: u64 = counts.counts.iter().filter(|(&k, _)| (k >> pos) & 1 == 1).map(|(_, &v)| v).sum();
    1.0 - 2.0 * ones as f64 / counts.shots as f64
}

#[test]
fn success_frequencies() {
    let shots = 100_000;
    let c = rotation(2);
    let s = success_counts(&run_shots(&c, &NoiseSpec::noiseless(), shots, 1).unwrap(), &c).unwrap();
    assert!((s.p_success() - 0.625).abs() <= 0.005);
    let c = rotation(5);
    let s = success_counts(&run_shots(&c, &NoiseSpec::noiseless(), shots, 2).unwrap(), &c).unwrap();
    assert!((s.p_success() - 0.5957).abs() <= 0.005);
}

#[test]
fn success_split_marks_empty_branch() {
    let c = rotation(2);
    let counts = ShotCounts { measured: vec![1, 2, 0], shots: 10, seed: 0, counts: BTreeMap::from([(0b100, 4), (0, 6)]) };
    let s = success_counts(&counts, &c).unwrap();
    assert_eq!((s.success, s.success_target, s.failure_target), (10, [6, 4], [0, 0]));
    assert_eq!(s.p_success(), 1.0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let c = rotation(5);
    let noise = NoiseSpec::new(0.05, NoiseConvention::MixedState);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_shots(&c, &noise, 20_000, 99).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn records_agree_with_counts() {
    let c = rotation(4);
    let noise = NoiseSpec::new(0.1, NoiseConvention::UniformPauli);
    let counts = run_shots(&c, &noise, 3000, 4).unwrap();
    let records = run_records(&c, &noise, 3000, 4).unwrap();
    let ok = records.iter().filter(|r| r.outer.iter().all(|&b| !b)).count() as u64;
    assert_eq!(ok, success_counts(&counts, &c).unwrap().success);
    assert!(records.iter().all(|r| r.outer.len() == 4 && r.target.is_some()));
}
