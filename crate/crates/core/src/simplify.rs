//! Rewrite passes from the naive rotation circuit to the simplified one.
//!
//! The passes are peephole rewrites over the shapes the builder emits. Run
//! [`pass_halve_tests`] first; the remaining three may then be applied in any
//! order and reach the same circuit.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::builder::ComparatorLayout;
use crate::circuit::{executed_census, Basis, Census, Circuit, Gate, InitialState, QubitId, QubitRole};
use crate::error::Result;
use crate::planner::RotationPlan;

fn self_inverse(g: &Gate) -> bool {
    !matches!(g, Gate::S(_) | Gate::Sdg(_))
}

/// Drop the uncompute half of the first test and the compute half of the
/// second, then write the last comparator stage straight onto the target.
pub fn pass_halve_tests(c: &Circuit) -> Circuit {
    match halve(c) {
        Some(out) => out,
        None => {
            warn!("halve_tests: no pair of full tests around the S gate; circuit left unchanged");
            c.clone()
        }
    }
}

fn halve(c: &Circuit) -> Option<Circuit> {
    let t = c.target()?;
    let s_pos: Vec<usize> = c.gates.iter().enumerate().filter(|(_, g)| **g == Gate::S(t)).map(|(i, _)| i).collect();
    let &[s] = s_pos.as_slice() else { return None };
    let copy_from = |g: &Gate| match *g {
        Gate::Cnot { control, target } if target == t => Some(control),
        _ => None,
    };
    let first = (0..s).rev().find(|&i| c.gates[i].acts_on(t))?;
    let second = (s + 1..c.gates.len()).find(|&i| c.gates[i].acts_on(t))?;
    let res = copy_from(&c.gates[first])?;
    if copy_from(&c.gates[second]) != Some(res) {
        return None;
    }
    let undo = &c.gates[first + 1..s];
    let redo = &c.gates[s + 1..second];
    if undo.len() != redo.len() || !undo.iter().rev().eq(redo.iter()) || !undo.iter().all(self_inverse) {
        return None;
    }

    let mut out = c.clone();
    out.gates = c.gates[..first + 1].iter().chain(std::iter::once(&c.gates[s])).chain(&c.gates[second..]).copied().collect();
    fold_copy(&mut out, res, t);
    Some(out)
}

/// `res` starts and ends in `|0⟩` and is only ever flipped, so every flip of
/// `res` before the first copy (and after the second) can flip the target
/// directly and the copies disappear.
fn fold_copy(c: &mut Circuit, res: QubitId, t: QubitId) {
    let spec = c.qubits[res];
    if !matches!(spec.role, QubitRole::InnerAncilla(_))
        || spec.init != InitialState::Zero
        || spec.known_final != Some(false)
        || c.measurement_of(res).is_some()
        || c.gates.iter().any(|g| g.is_control_of(res) && *g != Gate::Cnot { control: res, target: t })
    {
        return;
    }
    let copies: Vec<usize> = (0..c.gates.len()).filter(|&i| c.gates[i] == Gate::Cnot { control: res, target: t }).collect();
    let &[a, b] = copies.as_slice() else { return };
    // Between the retargeted flips and their copy, the target may only be
    // flipped too, otherwise the move does not commute.
    let flips_only = |range: std::ops::Range<usize>| {
        c.gates[range].iter().all(|g| !g.acts_on(t) || (g.not_target() == Some(t) && !g.is_control_of(t)))
    };
    let first_res = (0..a).find(|&i| c.gates[i].acts_on(res)).unwrap_or(a);
    let last_res = (b + 1..c.gates.len()).rev().find(|&i| c.gates[i].acts_on(res)).unwrap_or(b);
    if !flips_only(first_res..a) || !flips_only(b + 1..last_res + 1) {
        return;
    }
    let retarget = |g: Gate| match g {
        Gate::X(q) if q == res => Gate::X(t),
        Gate::Cnot { control, target } if target == res => Gate::Cnot { control, target: t },
        Gate::Toffoli { controls, target } if target == res => Gate::Toffoli { controls, target: t },
        Gate::ToffoliInvCtl { controls, target, inverted } if target == res => {
            Gate::ToffoliInvCtl { controls, target: t, inverted }
        }
        g => g,
    };
    c.gates = c
        .gates
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a && i != b)
        .map(|(_, &g)| retarget(g))
        .collect();
    if c.remove_qubit(res).is_err() {
        unreachable!("result ancilla still referenced after folding");
    }
}

/// Remove X gates by commuting them through flips and absorbing them into
/// control polarities, then drop inversions that a relabelling of an ancilla
/// removes.
pub fn pass_cancel_x(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    for q in 0..out.num_qubits() {
        sweep_x(&mut out, q);
    }
    for q in 0..out.num_qubits() {
        if relabel_allowed(&out, q) {
            for g in out.gates.iter_mut() {
                toggle_control(g, q);
            }
            let spec = &mut out.qubits[q];
            if let QubitRole::InnerAncilla(_) = spec.role {
                spec.init = toggle_basis(spec.init);
                spec.known_final = spec.known_final.map(|b| !b);
            }
        }
    }
    for g in out.gates.iter_mut() {
        if let Gate::ToffoliInvCtl { controls, target, inverted: [false, false] } = *g {
            *g = Gate::Toffoli { controls, target };
        }
    }
    out
}

fn toggle_basis(s: InitialState) -> InitialState {
    match s {
        InitialState::Zero => InitialState::One,
        InitialState::One => InitialState::Zero,
        s => s,
    }
}

fn toggle_control(g: &mut Gate, q: QubitId) -> bool {
    match *g {
        Gate::Toffoli { controls, target } if controls.contains(&q) => {
            let inverted = [controls[0] == q, controls[1] == q];
            *g = Gate::ToffoliInvCtl { controls, target, inverted };
            true
        }
        Gate::ToffoliInvCtl { controls, target, mut inverted } if controls.contains(&q) => {
            let i = if controls[0] == q { 0 } else { 1 };
            inverted[i] = !inverted[i];
            *g = Gate::ToffoliInvCtl { controls, target, inverted };
            true
        }
        _ => false,
    }
}

/// Carry the X parity of `q` left to right. It passes gates that flip `q`,
/// flips the polarity of Toffoli controls on `q`, and is written out before
/// anything else. A parity left on an unmeasured ancilla with a known final
/// state is folded into that state.
fn sweep_x(c: &mut Circuit, q: QubitId) {
    let mut parity = false;
    let mut gates = Vec::with_capacity(c.gates.len());
    for &g in &c.gates {
        if g == Gate::X(q) {
            parity = !parity;
            continue;
        }
        if !g.acts_on(q) || g.not_target() == Some(q) {
            gates.push(g);
            continue;
        }
        let mut g = g;
        if parity && !toggle_control(&mut g, q) {
            gates.push(Gate::X(q));
            parity = false;
        }
        gates.push(g);
    }
    if parity {
        let spec = &mut c.qubits[q];
        if c.measurements.iter().all(|m| m.qubit != q) && spec.known_final.is_some() {
            spec.known_final = spec.known_final.map(|b| !b);
        } else {
            gates.push(Gate::X(q));
        }
    }
    c.gates = gates;
}

/// Whether conjugating every use of `q` by X leaves the heralded channel
/// unchanged, and every such use is an inverted control.
fn relabel_allowed(c: &Circuit, q: QubitId) -> bool {
    let uses: Vec<&Gate> = c.gates.iter().filter(|g| g.acts_on(q)).collect();
    let inverted_control = |g: &Gate| match *g {
        Gate::ToffoliInvCtl { controls, inverted, .. } => controls.iter().zip(inverted).any(|(&p, inv)| p == q && inv),
        _ => false,
    };
    let spec = c.qubits[q];
    let body: &[&Gate] = match spec.role {
        QubitRole::Target => return false,
        // X|+⟩ = |+⟩ and an X before an X-basis readout only flips the phase.
        QubitRole::OuterAncilla(_) => {
            let mut body = uses.as_slice();
            match spec.init {
                InitialState::Plus => {}
                InitialState::Zero if body.first() == Some(&&Gate::H(q)) => body = &body[1..],
                _ => return false,
            }
            match c.measurement_of(q) {
                Some(Basis::X) => {}
                Some(Basis::Z) if body.last() == Some(&&Gate::H(q)) => body = &body[..body.len() - 1],
                _ => return false,
            }
            body
        }
        QubitRole::InnerAncilla(_) => {
            let computational = matches!(spec.init, InitialState::Zero | InitialState::One);
            if !computational || spec.known_final.is_none() || c.measurement_of(q).is_some() {
                return false;
            }
            if uses.iter().any(|g| !(g.not_target() == Some(q) || inverted_control(g))) {
                return false;
            }
            &uses
        }
    };
    let controls: Vec<&&Gate> = body.iter().filter(|g| g.not_target() != Some(q)).collect();
    !controls.is_empty() && controls.iter().all(|g| inverted_control(g))
}

/// Replace a leading H on a `|0⟩` outer ancilla by a `|+⟩` preparation and
/// leading X gates on computational-basis inner ancillas by a flipped
/// preparation.
pub fn pass_state_prep(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    for q in 0..out.num_qubits() {
        loop {
            let Some(pos) = out.gates.iter().position(|g| g.acts_on(q)) else { break };
            let spec = &mut out.qubits[q];
            match (spec.role, spec.init, out.gates[pos]) {
                (QubitRole::OuterAncilla(_), InitialState::Zero, Gate::H(p)) if p == q => {
                    spec.init = InitialState::Plus;
                }
                (QubitRole::InnerAncilla(_), InitialState::Zero | InitialState::One, Gate::X(p)) if p == q => {
                    spec.init = toggle_basis(spec.init);
                }
                _ => break,
            }
            out.gates.remove(pos);
        }
    }
    out
}

/// Replace a trailing H before a Z readout of an outer ancilla by an X-basis
/// readout.
pub fn pass_basis_measure(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    for q in out.outer_ancillas() {
        let Some(m) = out.measurements.iter().position(|m| m.qubit == q && m.basis == Basis::Z) else { continue };
        let Some(pos) = out.gates.iter().rposition(|g| g.acts_on(q)) else { continue };
        if out.gates[pos] == Gate::H(q) {
            out.gates.remove(pos);
            out.measurements[m].basis = Basis::X;
        }
    }
    out
}

/// All passes in the canonical order.
pub fn simplify(c: &Circuit) -> Circuit {
    pass_basis_measure(&pass_state_prep(&pass_cancel_x(&pass_halve_tests(c))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub k: u64,
    pub n: u32,
    /// Executed censuses, measurement basis changes counted as gates.
    pub before: Census,
    pub after: Census,
    /// `before − after` per gate kind.
    pub delta: BTreeMap<String, i64>,
    pub predicted_dx: i64,
    pub predicted_dh: i64,
    pub x_matches: bool,
    pub h_matches: bool,
}

impl ReductionReport {
    pub fn matches(&self) -> bool {
        self.x_matches && self.h_matches
    }
}

/// Compare the executed censuses of two builds of `plan`. The predictions
/// (ten X gates per zero bit of the comparator, one H per outer ancilla)
/// describe the step from the halved circuit to the fully simplified one.
pub fn reduction_report(before: &Circuit, after: &Circuit, plan: &RotationPlan) -> Result<ReductionReport> {
    let layout = ComparatorLayout::new(plan)?;
    let zeros = layout.stages().filter(|&i| !layout.bits[i]).count() as i64;
    let b = executed_census(before);
    let a = executed_census(after);
    let delta: BTreeMap<String, i64> = b.delta(&a).into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let predicted_dx = 10 * zeros;
    let predicted_dh = layout.n as i64;
    Ok(ReductionReport {
        k: layout.k,
        n: layout.n,
        before: b,
        after: a,
        x_matches: delta["x"] == predicted_dx,
        h_matches: delta["h"] == predicted_dh,
        delta,
        predicted_dx,
        predicted_dh,
    })
}
