//! Noiseless dense statevector evolution with exact branch data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, InitialState};
use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix1Q, CMatrix, C64, I, ONE, ZERO};

pub const MAX_EXACT_QUBITS: usize = 20;

/// One outer-ancilla outcome class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactBranch {
    /// Outer ancilla outcomes, ordered by ancilla index.
    pub outcome: Vec<bool>,
    pub probability: f64,
    /// Target state conditioned on this outcome; `None` when the class has
    /// zero probability.
    pub target_state: Option<DensityMatrix1Q>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub branches: Vec<ExactBranch>,
    /// Probability that each inner ancilla ends in `|1⟩`.
    pub inner_one_probability: Vec<f64>,
}

impl ExactResult {
    pub fn success(&self) -> &ExactBranch {
        self.branches.iter().find(|b| b.outcome.iter().all(|&x| !x)).expect("all-zero class present")
    }

    pub fn success_probability(&self) -> f64 {
        self.success().probability
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExactBranch> {
        self.branches.iter().filter(|b| b.outcome.iter().any(|&x| x))
    }
}

/// Dense statevector; qubit 0 is the least significant index bit.
#[derive(Debug, Clone)]
pub struct StateVector {
    amps: Vec<C64>,
    num_qubits: usize,
}

impl StateVector {
    /// Product state from the circuit's preparations. `input` supplies the
    /// target when it is prepared as [`InitialState::Input`].
    pub fn prepare(c: &Circuit, input: Option<[C64; 2]>) -> Result<Self> {
        let nq = c.num_qubits();
        if nq > MAX_EXACT_QUBITS {
            return Err(Error::Size(nq, MAX_EXACT_QUBITS));
        }
        let mut amps = vec![ONE];
        // Build high qubits first so that qubit 0 ends up least significant.
        for spec in c.qubits.iter().rev() {
            let local = match spec.init {
                InitialState::Input => {
                    input.ok_or_else(|| Error::Validation("circuit needs an input state".into()))?
                }
                s => s.amplitudes().expect("prescribed state"),
            };
            let mut next = Vec::with_capacity(amps.len() * 2);
            for &a in &amps {
                next.push(a * local[0]);
                next.push(a * local[1]);
            }
            amps = next;
        }
        Ok(StateVector { amps, num_qubits: nq })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn apply(&mut self, g: &Gate) {
        match *g {
            Gate::H(q) => {
                let bit = 1 << q;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | bit]);
                        self.amps[i] = (a + b) * s;
                        self.amps[i | bit] = (a - b) * s;
                    }
                }
            }
            Gate::X(q) => self.flip_where(q, 0, 0),
            Gate::Z(q) => self.phase_where(1 << q, -ONE),
            Gate::S(q) => self.phase_where(1 << q, I),
            Gate::Sdg(q) => self.phase_where(1 << q, -I),
            Gate::Cnot { control, target } => self.flip_where(target, 1 << control, 1 << control),
            Gate::Toffoli { controls, target } => {
                let m = (1 << controls[0]) | (1 << controls[1]);
                self.flip_where(target, m, m);
            }
            Gate::ToffoliInvCtl { controls, target, inverted } => {
                let m = (1 << controls[0]) | (1 << controls[1]);
                let want = controls
                    .iter()
                    .zip(inverted)
                    .filter(|(_, inv)| !inv)
                    .map(|(&q, _)| 1 << q)
                    .sum::<usize>();
                self.flip_where(target, m, want);
            }
        }
    }

    fn flip_where(&mut self, target: usize, mask: usize, want: usize) {
        let bit = 1 << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 && i & mask == want {
                self.amps.swap(i, i | bit);
            }
        }
    }

    fn phase_where(&mut self, bit: usize, phase: C64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= phase;
            }
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
}

/// Noiseless run returning, for every outer-ancilla outcome class, its
/// probability and the conditional target state. The target is not measured.
pub fn run_exact(c: &Circuit, input: Option<[C64; 2]>) -> Result<ExactResult> {
    c.validate()?;
    let target = c.target().ok_or_else(|| Error::Validation("circuit has no target".into()))?;
    let mut sv = StateVector::prepare(c, input)?;
    for g in &c.gates {
        sv.apply(g);
    }
    let outer = c.outer_ancillas();
    for &q in &outer {
        if let Some(basis) = c.measurement_of(q) {
            for g in basis.change_gates(q) {
                sv.apply(&g);
            }
        }
    }
    let inner = c.inner_ancillas();
    let class_of = |i: usize| -> usize {
        outer.iter().enumerate().map(|(pos, &q)| ((i >> q) & 1) << pos).sum()
    };
    let tbit = 1usize << target;
    let mut acc: BTreeMap<usize, [C64; 3]> = BTreeMap::new();
    let mut inner_one = vec![0.0; inner.len()];
    for (i, &a) in sv.amps.iter().enumerate() {
        let p = a.norm_sqr();
        for (j, &q) in inner.iter().enumerate() {
            if (i >> q) & 1 == 1 {
                inner_one[j] += p;
            }
        }
        if i & tbit != 0 {
            continue;
        }
        let b = sv.amps[i | tbit];
        let e = acc.entry(class_of(i)).or_insert([ZERO; 3]);
        e[0] += a * a.conj();
        e[1] += a * b.conj();
        e[2] += b * b.conj();
    }
    let branches = (0..1usize << outer.len())
        .map(|cls| {
            let [r00, r01, r11] = acc.get(&cls).copied().unwrap_or([ZERO; 3]);
            let prob = (r00 + r11).re;
            let target_state = (prob > 1e-14).then(|| {
                let m = CMatrix::from_vec(2, 2, vec![r00 / prob, r01 / prob, r01.conj() / prob, r11 / prob])
                    .expect("finite");
                DensityMatrix1Q::new(m).expect("normalised conditional state")
            });
            ExactBranch { outcome: (0..outer.len()).map(|p| (cls >> p) & 1 == 1).collect(), probability: prob, target_state }
        })
        .collect();
    Ok(ExactResult { branches, inner_one_probability: inner_one })
}

/// Probability distribution over Z readouts of every measured qubit, in
/// measurement order, after the measurement basis changes.
pub fn exact_outcome_distribution(c: &Circuit, input: Option<[C64; 2]>) -> Result<BTreeMap<u64, f64>> {
    c.validate()?;
    let mut sv = StateVector::prepare(c, input)?;
    for g in &c.gates {
        sv.apply(g);
    }
    for m in &c.measurements {
        for g in m.basis.change_gates(m.qubit) {
            sv.apply(&g);
        }
    }
    let mut dist = BTreeMap::new();
    for (i, a) in sv.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let key: u64 = c.measurements.iter().enumerate().map(|(pos, m)| (((i >> m.qubit) & 1) as u64) << pos).sum();
        *dist.entry(key).or_insert(0.0) += p;
    }
    Ok(dist)
}
