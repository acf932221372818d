//! Construction of the one-shot rotation circuit.
//!
//! `n` outer ancillas in `|+⟩` address `2^n` basis states. A ripple-carry
//! `≥ k` test marks those with value at least `k` on the target, an `S` is
//! applied, and the test is undone. Reading every outer ancilla as `0` in the
//! X basis heralds `R_{θ*}` on the target; any other outcome heralds `Z`.
//!
//! The carry-in of the comparator is fixed to 1, so a trailing `1` bit of `k`
//! makes stage 0 the identity and outer ancilla 0 serves directly as the first
//! carry. Stage `i` then combines ancilla `i` with carry `i`: AND when bit `i`
//! of `k` is 1, OR when it is 0. Every stage but the last writes onto an inner
//! ancilla; the last writes onto the target.

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, Circuit, Gate, InitialState, QubitId, QubitRole};
use crate::error::{Error, Result};
use crate::planner::RotationPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Style {
    /// Two full compute/copy/uncompute tests, explicit Hadamards and X
    /// conjugations, all ancillas starting in `|0⟩`.
    Naive,
    /// Halved tests on shared inner ancillas, outer ancillas prepared in `|+⟩`
    /// and read out in X, inner ancillas prepared so that no X gates remain.
    #[default]
    Simplified,
}

impl std::str::FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Style::Naive),
            "simplified" => Ok(Style::Simplified),
            other => Err(Error::Validation(format!("unknown style `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageKind {
    /// Low zero bits of an unreduced `k`; the ancilla is never used.
    Idle,
    /// The lowest one bit; its ancilla is the first carry.
    SkippedLsb,
    And,
    Or,
}

/// Bit-by-bit plan of the comparator for a given `k`, least significant bit
/// first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparatorLayout {
    pub n: u32,
    /// Constant actually compared against (mirrored for negative angles).
    pub k: u64,
    pub mirrored: bool,
    pub bits: Vec<bool>,
    pub kinds: Vec<StageKind>,
    /// Inner ancilla written by each bit's stage, `None` for skipped bits and
    /// for the final stage, which writes onto the target.
    pub inner: Vec<Option<usize>>,
}

impl ComparatorLayout {
    pub fn new(plan: &RotationPlan) -> Result<Self> {
        let n = plan.n;
        if n < 2 {
            return Err(Error::Domain(format!("the rotation circuit needs n ≥ 2, got n = {n}")));
        }
        let h = 1u64 << (n - 1);
        let mirrored = plan.k < h;
        let k = if mirrored { 2 * h - plan.k } else { plan.k };
        if !(h..2 * h).contains(&k) {
            return Err(Error::Internal(format!("k = {} has no {n}-bit comparator layout", plan.k)));
        }
        let bits: Vec<bool> = (0..n).map(|i| (k >> i) & 1 == 1).collect();
        let low = k.trailing_zeros() as usize;
        let top = n as usize - 1;
        let mut kinds = Vec::with_capacity(n as usize);
        let mut inner = Vec::with_capacity(n as usize);
        let mut next_inner = 0;
        for (i, &b) in bits.iter().enumerate() {
            if i < low {
                kinds.push(StageKind::Idle);
                inner.push(None);
            } else if i == low {
                kinds.push(StageKind::SkippedLsb);
                inner.push(None);
            } else {
                kinds.push(if b { StageKind::And } else { StageKind::Or });
                if i < top {
                    inner.push(Some(next_inner));
                    next_inner += 1;
                } else {
                    inner.push(None);
                }
            }
        }
        if n == 2 && plan.reduced && k != 3 {
            return Err(Error::Internal(format!("reduced n = 2 plan with k = {k}")));
        }
        Ok(ComparatorLayout { n, k, mirrored, bits, kinds, inner })
    }

    pub fn first_active(&self) -> usize {
        self.kinds.iter().position(|&s| s == StageKind::SkippedLsb).expect("k > 0")
    }

    /// Bits that need a Toffoli stage.
    pub fn stages(&self) -> impl Iterator<Item = usize> + '_ {
        (self.first_active() + 1)..self.n as usize
    }

    pub fn stage_count(&self) -> usize {
        self.stages().count()
    }

    pub fn inner_count(&self) -> usize {
        self.inner.iter().flatten().count()
    }
}

struct Registers {
    target: QubitId,
    outer: Vec<QubitId>,
    inner: Vec<QubitId>,
}

fn allocate(c: &mut Circuit, n: usize, inner: usize, outer_init: InitialState) -> Registers {
    let target = c.add_qubit(QubitRole::Target, InitialState::Zero);
    let outer = (0..n).map(|i| c.add_qubit(QubitRole::OuterAncilla(i), outer_init)).collect();
    let inner = (0..inner).map(|j| c.add_qubit(QubitRole::InnerAncilla(j), InitialState::Zero)).collect();
    Registers { target, outer, inner }
}

/// Build the rotation circuit for `plan`. The target starts in `|0⟩` and is
/// measured in Z; use [`Circuit::set_target_state`] and
/// [`Circuit::set_target_basis`] for other settings.
pub fn build(plan: &RotationPlan, style: Style) -> Result<Circuit> {
    let layout = ComparatorLayout::new(plan)?;
    let c = match style {
        Style::Simplified => build_simplified(&layout),
        Style::Naive => build_naive(&layout),
    };
    c.validate()?;
    Ok(c)
}

fn build_simplified(layout: &ComparatorLayout) -> Circuit {
    let n = layout.n as usize;
    let mut c = Circuit::new();
    let regs = allocate(&mut c, n, layout.inner_count(), InitialState::Plus);
    let first = layout.first_active();
    let top = n - 1;
    let zero = |i: usize| !layout.bits[i];

    // Inner ancilla of stage i stores carry i+1, complemented when exactly one
    // of bits i and i+1 is zero; that keeps every control plain.
    for i in layout.stages() {
        if let Some(j) = layout.inner[i] {
            let flip = zero(i) ^ zero(i + 1);
            let q = regs.inner[j];
            c.qubits[q].init = if flip { InitialState::One } else { InitialState::Zero };
            c.qubits[q].known_final = Some(flip);
        }
    }

    let carry_of = |i: usize| -> QubitId {
        if i == first + 1 {
            regs.outer[first]
        } else {
            regs.inner[layout.inner[i - 1].expect("inner carry")]
        }
    };
    let stage_gate = |i: usize| -> Gate {
        let target = layout.inner[i].map_or(regs.target, |j| regs.inner[j]);
        Gate::Toffoli { controls: [regs.outer[i], carry_of(i)], target }
    };

    // A mirrored comparator runs on the complemented target.
    let compute: Vec<Gate> = if layout.stage_count() == 0 {
        vec![Gate::Cnot { control: regs.outer[top], target: regs.target }]
    } else {
        layout.stages().map(stage_gate).collect()
    };
    c.gates.extend(compute.iter().copied());
    if layout.mirrored {
        c.push(Gate::X(regs.target));
    }
    c.push(Gate::S(regs.target));
    c.gates.extend(compute.iter().rev().copied());
    if layout.mirrored {
        c.push(Gate::X(regs.target));
    }
    for &q in &regs.outer {
        c.measure(q, Basis::X);
    }
    c.measure(regs.target, Basis::Z);
    c
}

fn build_naive(layout: &ComparatorLayout) -> Circuit {
    let n = layout.n as usize;
    let stages: Vec<usize> = layout.stages().collect();
    let mut c = Circuit::new();
    // One inner ancilla per stage; the last one holds the test result.
    let regs = allocate(&mut c, n, stages.len(), InitialState::Zero);
    let first = layout.first_active();
    for &q in &regs.inner {
        c.qubits[q].known_final = Some(false);
    }

    let mut compute = Vec::new();
    for (s, &i) in stages.iter().enumerate() {
        let a = regs.outer[i];
        let carry = if s == 0 { regs.outer[first] } else { regs.inner[s - 1] };
        let out = regs.inner[s];
        if layout.bits[i] {
            compute.push(Gate::Toffoli { controls: [a, carry], target: out });
        } else {
            // OR(a, c) = NOT(AND(NOT a, NOT c))
            compute.extend([Gate::X(a), Gate::X(carry)]);
            compute.push(Gate::Toffoli { controls: [a, carry], target: out });
            compute.extend([Gate::X(a), Gate::X(carry), Gate::X(out)]);
        }
    }
    let result = regs.inner.last().copied().unwrap_or(regs.outer[first]);
    let mut test = compute.clone();
    test.push(Gate::Cnot { control: result, target: regs.target });
    test.extend(compute.iter().rev().copied());

    c.gates.extend(regs.outer.iter().map(|&q| Gate::H(q)));
    if layout.mirrored {
        c.push(Gate::X(regs.target));
    }
    c.gates.extend(test.iter().copied());
    c.push(Gate::S(regs.target));
    c.gates.extend(test.iter().copied());
    if layout.mirrored {
        c.push(Gate::X(regs.target));
    }
    c.gates.extend(regs.outer.iter().map(|&q| Gate::H(q)));
    for &q in &regs.outer {
        c.measure(q, Basis::Z);
    }
    c.measure(regs.target, Basis::Z);
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    AppliedTstar,
    AppliedZstar,
}

/// The rotation was applied iff every outer ancilla reads 0.
pub fn success_predicate(outcomes: &[bool], n: usize) -> Result<Branch> {
    if outcomes.len() != n {
        return Err(Error::Validation(format!("{} outcome bits for {n} outer ancillas", outcomes.len())));
    }
    Ok(if outcomes.iter().all(|&b| !b) { Branch::AppliedTstar } else { Branch::AppliedZstar })
}
