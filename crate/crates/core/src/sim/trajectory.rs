//! Monte-Carlo trajectories under stochastic Pauli noise.
//!
//! The state is kept as a sparse list of `(basis index, amplitude)` pairs.
//! Every gate of these circuits except `H` permutes or phases basis states, so
//! the support stays at the size of the initial product state; `H` merges
//! entries through a slot table indexed by the untouched bits.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::NoiseSpec;
use crate::circuit::{Circuit, Gate, InitialState, QubitId};
use crate::error::{Error, Result};
use crate::qcore::{C64, I, ONE};

/// Trajectory registers are addressed with `u32` indices.
pub const MAX_TRAJECTORY_QUBITS: usize = 26;

const CHUNK: u64 = 2048;
const EMPTY: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
enum Op {
    Flip { bit: u32, mask: u32, want: u32 },
    Phase { bit: u32, phase: C64 },
    H { bit: u32 },
    Noise { bit: u32 },
    Measure { bit: u32, slot: u32 },
}

/// Circuit lowered to sparse-state operations with noise sites inserted.
#[derive(Debug, Clone)]
pub struct Program {
    ops: Vec<Op>,
    initial: Vec<(u32, C64)>,
    num_qubits: usize,
    measured: Vec<QubitId>,
    pauli_rate: f64,
}

impl Program {
    pub fn compile(c: &Circuit, noise: &NoiseSpec) -> Result<Self> {
        c.validate()?;
        noise.validate()?;
        let nq = c.num_qubits();
        if nq > MAX_TRAJECTORY_QUBITS {
            return Err(Error::Size(nq, MAX_TRAJECTORY_QUBITS));
        }
        let noisy = !noise.is_silent();
        let gate_noise = noisy && noise.apply_at_gates;
        let mut ops = Vec::new();
        let push_gate = |ops: &mut Vec<Op>, g: &Gate| {
            let b = |q: QubitId| 1u32 << q;
            match *g {
                Gate::H(q) => ops.push(Op::H { bit: b(q) }),
                Gate::X(q) => ops.push(Op::Flip { bit: b(q), mask: 0, want: 0 }),
                Gate::Z(q) => ops.push(Op::Phase { bit: b(q), phase: -ONE }),
                Gate::S(q) => ops.push(Op::Phase { bit: b(q), phase: I }),
                Gate::Sdg(q) => ops.push(Op::Phase { bit: b(q), phase: -I }),
                Gate::Cnot { control, target } => {
                    ops.push(Op::Flip { bit: b(target), mask: b(control), want: b(control) })
                }
                Gate::Toffoli { controls, target } => {
                    let m = b(controls[0]) | b(controls[1]);
                    ops.push(Op::Flip { bit: b(target), mask: m, want: m });
                }
                Gate::ToffoliInvCtl { controls, target, inverted } => {
                    let m = b(controls[0]) | b(controls[1]);
                    let want = controls.iter().zip(inverted).filter(|(_, inv)| !inv).map(|(&q, _)| b(q)).sum();
                    ops.push(Op::Flip { bit: b(target), mask: m, want });
                }
            }
            if gate_noise {
                ops.extend(g.qubits().into_iter().map(|q| Op::Noise { bit: b(q) }));
            }
        };
        for g in &c.gates {
            push_gate(&mut ops, g);
        }
        for (slot, m) in c.measurements.iter().enumerate() {
            for g in m.basis.change_gates(m.qubit) {
                push_gate(&mut ops, &g);
            }
            if noisy && noise.apply_at_measure {
                ops.push(Op::Noise { bit: 1 << m.qubit });
            }
            ops.push(Op::Measure { bit: 1 << m.qubit, slot: slot as u32 });
        }

        let mut initial = vec![(0u32, ONE)];
        for (q, spec) in c.qubits.iter().enumerate() {
            let bit = 1u32 << q;
            match spec.init {
                InitialState::Zero => {}
                InitialState::One => initial.iter_mut().for_each(|e| e.0 |= bit),
                InitialState::Input => {
                    return Err(Error::Validation(
                        "shot simulation needs a prescribed target preparation, not an arbitrary input".into(),
                    ))
                }
                s => {
                    let [a0, a1] = s.amplitudes().expect("prescribed state");
                    initial = initial.iter().flat_map(|&(i, a)| [(i, a * a0), (i | bit, a * a1)]).collect();
                }
            }
        }
        Ok(Program {
            ops,
            initial,
            num_qubits: nq,
            measured: c.measurements.iter().map(|m| m.qubit).collect(),
            pauli_rate: if noisy { noise.pauli_rate() } else { 0.0 },
        })
    }

    /// Run one trajectory; bit `j` of the result is the readout of the `j`-th
    /// measurement.
    fn shot(&self, ws: &mut Workspace, rng: &mut ChaCha8Rng) -> u64 {
        ws.state.clear();
        ws.state.extend_from_slice(&self.initial);
        let mut outcome = 0u64;
        for op in &self.ops {
            match *op {
                Op::Flip { bit, mask, want } => flip(&mut ws.state, bit, mask, want),
                Op::Phase { bit, phase } => phase_where(&mut ws.state, bit, phase),
                Op::H { bit } => ws.hadamard(bit),
                Op::Noise { bit } => {
                    if rng.random::<f64>() < self.pauli_rate {
                        match rng.random_range(0..3u8) {
                            0 => flip(&mut ws.state, bit, 0, 0),
                            1 => apply_y(&mut ws.state, bit),
                            _ => phase_where(&mut ws.state, bit, -ONE),
                        }
                    }
                }
                Op::Measure { bit, slot } => {
                    let mut total = 0.0;
                    let mut p1 = 0.0;
                    for &(i, a) in &ws.state {
                        let p = a.norm_sqr();
                        total += p;
                        if i & bit != 0 {
                            p1 += p;
                        }
                    }
                    let one = rng.random::<f64>() * total < p1;
                    let kept = if one { p1 } else { total - p1 };
                    let norm = 1.0 / kept.sqrt();
                    ws.state.retain(|&(i, _)| (i & bit != 0) == one);
                    ws.state.iter_mut().for_each(|e| e.1 *= norm);
                    if one {
                        outcome |= 1 << slot;
                    }
                }
            }
        }
        outcome
    }

    pub fn measured(&self) -> &[QubitId] {
        &self.measured
    }
}

fn flip(state: &mut [(u32, C64)], bit: u32, mask: u32, want: u32) {
    for e in state.iter_mut() {
        if e.0 & mask == want {
            e.0 ^= bit;
        }
    }
}

fn phase_where(state: &mut [(u32, C64)], bit: u32, phase: C64) {
    for e in state.iter_mut() {
        if e.0 & bit != 0 {
            e.1 *= phase;
        }
    }
}

// Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
fn apply_y(state: &mut [(u32, C64)], bit: u32) {
    for e in state.iter_mut() {
        e.1 *= if e.0 & bit == 0 { I } else { -I };
        e.0 ^= bit;
    }
}

struct Workspace {
    state: Vec<(u32, C64)>,
    next: Vec<(u32, C64)>,
    slots: Vec<u32>,
}

impl Workspace {
    fn new(num_qubits: usize, capacity: usize) -> Self {
        Workspace {
            state: Vec::with_capacity(capacity),
            next: Vec::with_capacity(capacity),
            slots: vec![EMPTY; 1 << num_qubits],
        }
    }

    fn hadamard(&mut self, bit: u32) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.next.clear();
        for &(i, a) in &self.state {
            let key = i & !bit;
            let a = a * s;
            let hi = if i & bit == 0 { a } else { -a };
            let slot = &mut self.slots[key as usize];
            if *slot == EMPTY {
                *slot = self.next.len() as u32;
                self.next.push((key, a));
                self.next.push((key | bit, hi));
            } else {
                let p = *slot as usize;
                self.next[p].1 += a;
                self.next[p + 1].1 += hi;
            }
        }
        for e in self.next.iter().step_by(2) {
            self.slots[e.0 as usize] = EMPTY;
        }
        self.next.retain(|e| e.1.norm_sqr() > 1e-28);
        std::mem::swap(&mut self.state, &mut self.next);
    }
}

fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Histogram of readouts over many trajectories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotCounts {
    /// Measured qubits in readout order.
    pub measured: Vec<QubitId>,
    pub shots: u64,
    pub seed: u64,
    /// Keyed by readout word, bit `j` holding measurement `j`.
    pub counts: BTreeMap<u64, u64>,
}

impl ShotCounts {
    /// Readout word as a string, character `j` giving measurement `j`.
    pub fn bitstring(&self, key: u64) -> String {
        (0..self.measured.len()).map(|j| if (key >> j) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn to_json(&self) -> CountsJson {
        CountsJson {
            seed: self.seed,
            shots: self.shots,
            measured: self.measured.clone(),
            counts: self.counts.iter().map(|(&k, &v)| (self.bitstring(k), v)).collect(),
        }
    }

    pub fn from_json(j: &CountsJson) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (s, &v) in &j.counts {
            if s.len() != j.measured.len() {
                return Err(Error::Schema(format!("bitstring `{s}` has wrong length")));
            }
            let mut key = 0u64;
            for (pos, ch) in s.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => key |= 1 << pos,
                    _ => return Err(Error::Schema(format!("bitstring `{s}` is not binary"))),
                }
            }
            counts.insert(key, v);
        }
        Ok(ShotCounts { measured: j.measured.clone(), shots: j.shots, seed: j.seed, counts })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsJson {
    pub seed: u64,
    pub shots: u64,
    pub measured: Vec<QubitId>,
    pub counts: BTreeMap<String, u64>,
}

/// One trajectory's readout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub outer: Vec<bool>,
    pub target: Option<bool>,
    /// Run seed and shot index; together they fix the trajectory's stream.
    pub seed: u64,
    pub shot: u64,
}

/// Sample `shots` trajectories. Shot `i` draws from its own stream derived
/// from `(seed, i)`, so results do not depend on the thread count.
pub fn run_shots(c: &Circuit, noise: &NoiseSpec, shots: u64, seed: u64) -> Result<ShotCounts> {
    let prog = Program::compile(c, noise)?;
    Ok(run_program(&prog, shots, seed))
}

pub fn run_program(prog: &Program, shots: u64, seed: u64) -> ShotCounts {
    let chunks = shots.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|ch| {
            let mut ws = Workspace::new(prog.num_qubits, prog.initial.len() * 2);
            let mut local: HashMap<u64, u64> = HashMap::new();
            for shot in ch * CHUNK..((ch + 1) * CHUNK).min(shots) {
                let mut rng = shot_rng(seed, shot);
                *local.entry(prog.shot(&mut ws, &mut rng)).or_insert(0) += 1;
            }
            local
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    ShotCounts { measured: prog.measured.clone(), shots, seed, counts: counts.into_iter().collect() }
}

/// Per-shot records, for small runs and debugging.
pub fn run_records(c: &Circuit, noise: &NoiseSpec, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
    let prog = Program::compile(c, noise)?;
    let outer = c.outer_ancillas();
    let target = c.target();
    let pos = |q: QubitId| prog.measured.iter().position(|&m| m == q);
    let mut ws = Workspace::new(prog.num_qubits, prog.initial.len() * 2);
    Ok((0..shots)
        .map(|shot| {
            let word = prog.shot(&mut ws, &mut shot_rng(seed, shot));
            let bit = |q: QubitId| pos(q).map(|p| (word >> p) & 1 == 1);
            ShotRecord {
                outer: outer.iter().map(|&q| bit(q).unwrap_or(false)).collect(),
                target: target.and_then(bit),
                seed,
                shot,
            }
        })
        .collect())
}

/// Split of the shots into the two heralded branches, with the target
/// readout histogram `[#0, #1]` of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SuccessCounts {
    pub shots: u64,
    pub success: u64,
    pub success_target: [u64; 2],
    pub failure_target: [u64; 2],
}

impl SuccessCounts {
    pub fn p_success(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.success as f64 / self.shots as f64
        }
    }
}

/// Classify shots by the outer-ancilla outcomes of `c`.
pub fn success_counts(counts: &ShotCounts, c: &Circuit) -> Result<SuccessCounts> {
    let pos = |q: QubitId| counts.measured.iter().position(|&m| m == q);
    let mut outer_mask = 0u64;
    for q in c.outer_ancillas() {
        let p = pos(q).ok_or_else(|| Error::Validation(format!("outer ancilla {q} was not measured")))?;
        outer_mask |= 1 << p;
    }
    let target_bit = c.target().and_then(pos);
    let mut out = SuccessCounts { shots: counts.shots, ..Default::default() };
    for (&key, &n) in &counts.counts {
        let t = target_bit.map_or(0, |p| ((key >> p) & 1) as usize);
        if key & outer_mask == 0 {
            out.success += n;
            out.success_target[t] += n;
        } else {
            out.failure_target[t] += n;
        }
    }
    Ok(out)
}
