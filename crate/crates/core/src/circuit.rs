//! Gate-level circuit representation.
//!
//! A [`Circuit`] carries its qubit registry (role and preparation of each
//! qubit), an ordered gate list and the measurement prescriptions. Keeping
//! preparations and measurements in the same object lets rewrite passes trade
//! gates for preparations and basis-change gates for measurement bases.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{gates, kron, CMatrix, C64, ONE, ZERO};

/// Largest register [`to_unitary`] will expand.
pub const MAX_UNITARY_QUBITS: usize = 12;

pub type QubitId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QubitRole {
    Target,
    OuterAncilla(usize),
    InnerAncilla(usize),
}

impl fmt::Display for QubitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitRole::Target => write!(f, "target"),
            QubitRole::OuterAncilla(i) => write!(f, "outer {i}"),
            QubitRole::InnerAncilla(i) => write!(f, "inner {i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InitialState {
    Zero,
    One,
    Plus,
    PlusI,
    /// Supplied by the caller at simulation time; target only.
    Input,
}

impl InitialState {
    /// State vector, or `None` for [`InitialState::Input`].
    pub fn amplitudes(self) -> Option<[C64; 2]> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            InitialState::Zero => Some([ONE, ZERO]),
            InitialState::One => Some([ZERO, ONE]),
            InitialState::Plus => Some([C64::new(s, 0.0), C64::new(s, 0.0)]),
            InitialState::PlusI => Some([C64::new(s, 0.0), C64::new(0.0, s)]),
            InitialState::Input => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InitialState::Zero => "0",
            InitialState::One => "1",
            InitialState::Plus => "+",
            InitialState::PlusI => "+i",
            InitialState::Input => "input",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];

    /// Gates that rotate this basis onto Z before a computational readout.
    pub fn change_gates(self, q: QubitId) -> Vec<Gate> {
        match self {
            Basis::X => vec![Gate::H(q)],
            Basis::Y => vec![Gate::Sdg(q), Gate::H(q)],
            Basis::Z => vec![],
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(QubitId),
    X(QubitId),
    S(QubitId),
    Sdg(QubitId),
    Z(QubitId),
    Cnot { control: QubitId, target: QubitId },
    Toffoli { controls: [QubitId; 2], target: QubitId },
    /// Toffoli whose flagged controls fire on `|0⟩` instead of `|1⟩`.
    ToffoliInvCtl { controls: [QubitId; 2], target: QubitId, inverted: [bool; 2] },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::S(_) => GateKind::S,
            Gate::Sdg(_) => GateKind::Sdg,
            Gate::Z(_) => GateKind::Z,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::ToffoliInvCtl { .. } => GateKind::ToffoliInvCtl,
        }
    }

    pub fn qubits(&self) -> Vec<QubitId> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::S(q) | Gate::Sdg(q) | Gate::Z(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Toffoli { controls, target } | Gate::ToffoliInvCtl { controls, target, .. } => {
                vec![controls[0], controls[1], target]
            }
        }
    }

    pub fn acts_on(&self, q: QubitId) -> bool {
        self.qubits().contains(&q)
    }

    /// Qubit flipped by a controlled-NOT style gate.
    pub fn not_target(&self) -> Option<QubitId> {
        match *self {
            Gate::Cnot { target, .. } | Gate::Toffoli { target, .. } | Gate::ToffoliInvCtl { target, .. } => {
                Some(target)
            }
            _ => None,
        }
    }

    pub fn is_control_of(&self, q: QubitId) -> bool {
        match *self {
            Gate::Cnot { control, .. } => control == q,
            Gate::Toffoli { controls, .. } | Gate::ToffoliInvCtl { controls, .. } => controls.contains(&q),
            _ => false,
        }
    }

    /// The equivalent gate sequence with inverted controls written as X pairs.
    pub fn expand_inverted_controls(&self) -> Vec<Gate> {
        match *self {
            Gate::ToffoliInvCtl { controls, target, inverted } => {
                let flips: Vec<Gate> =
                    controls.iter().zip(inverted).filter(|(_, inv)| *inv).map(|(&q, _)| Gate::X(q)).collect();
                let mut out = flips.clone();
                out.push(Gate::Toffoli { controls, target });
                out.extend(flips);
                out
            }
            g => vec![g],
        }
    }

    fn remap(&self, f: impl Fn(QubitId) -> QubitId) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(f(q)),
            Gate::X(q) => Gate::X(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::Z(q) => Gate::Z(f(q)),
            Gate::Cnot { control, target } => Gate::Cnot { control: f(control), target: f(target) },
            Gate::Toffoli { controls, target } => {
                Gate::Toffoli { controls: [f(controls[0]), f(controls[1])], target: f(target) }
            }
            Gate::ToffoliInvCtl { controls, target, inverted } => Gate::ToffoliInvCtl {
                controls: [f(controls[0]), f(controls[1])],
                target: f(target),
                inverted,
            },
        }
    }

    /// Local matrix on `qubits()` order, first listed qubit as the most
    /// significant factor.
    fn local_matrix(&self) -> CMatrix {
        let id = CMatrix::identity(2);
        let p0 = gates::projector(0);
        let p1 = gates::projector(1);
        let k = |ms: &[&CMatrix]| ms.iter().skip(1).fold((*ms[0]).clone(), |acc, m| kron(&acc, m).unwrap());
        match *self {
            Gate::H(_) => gates::h(),
            Gate::X(_) => gates::x(),
            Gate::S(_) => gates::s(),
            Gate::Sdg(_) => gates::sdg(),
            Gate::Z(_) => gates::z(),
            Gate::Cnot { .. } => k(&[&p0, &id]).add(&k(&[&p1, &gates::x()])).unwrap(),
            Gate::Toffoli { .. } => Gate::ToffoliInvCtl {
                controls: [0, 1],
                target: 2,
                inverted: [false, false],
            }
            .local_matrix(),
            Gate::ToffoliInvCtl { inverted, .. } => {
                let fire = |inv: bool| if inv { &p0 } else { &p1 };
                // I - P_a P_b ⊗ I + P_a P_b ⊗ X, with P the firing projectors.
                let all = k(&[&id, &id, &id]);
                let fired_id = k(&[fire(inverted[0]), fire(inverted[1]), &id]);
                let fired_x = k(&[fire(inverted[0]), fire(inverted[1]), &gates::x()]);
                all.sub(&fired_id).unwrap().add(&fired_x).unwrap()
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H q{q}"),
            Gate::X(q) => write!(f, "X q{q}"),
            Gate::S(q) => write!(f, "S q{q}"),
            Gate::Sdg(q) => write!(f, "Sdg q{q}"),
            Gate::Z(q) => write!(f, "Z q{q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT q{control} -> q{target}"),
            Gate::Toffoli { controls, target } => {
                write!(f, "Toffoli q{},q{} -> q{target}", controls[0], controls[1])
            }
            Gate::ToffoliInvCtl { controls, target, inverted } => {
                let mark = |i: usize| if inverted[i] { "!" } else { "" };
                write!(f, "Toffoli {}q{},{}q{} -> q{target}", mark(0), controls[0], mark(1), controls[1])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    S,
    Sdg,
    Z,
    Cnot,
    Toffoli,
    ToffoliInvCtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub role: QubitRole,
    pub init: InitialState,
    /// Computational-basis state an unmeasured ancilla is known to end in.
    pub known_final: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub qubit: QubitId,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Circuit {
    pub qubits: Vec<QubitSpec>,
    pub gates: Vec<Gate>,
    pub measurements: Vec<Measurement>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_qubit(&mut self, role: QubitRole, init: InitialState) -> QubitId {
        self.qubits.push(QubitSpec { role, init, known_final: None });
        self.qubits.len() - 1
    }

    pub fn push(&mut self, g: Gate) -> &mut Self {
        self.gates.push(g);
        self
    }

    pub fn measure(&mut self, qubit: QubitId, basis: Basis) -> &mut Self {
        self.measurements.push(Measurement { qubit, basis });
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn target(&self) -> Option<QubitId> {
        self.qubits.iter().position(|q| q.role == QubitRole::Target)
    }

    /// Outer ancillas ordered by their role index.
    pub fn outer_ancillas(&self) -> Vec<QubitId> {
        let mut v: Vec<(usize, QubitId)> = self
            .qubits
            .iter()
            .enumerate()
            .filter_map(|(id, q)| match q.role {
                QubitRole::OuterAncilla(i) => Some((i, id)),
                _ => None,
            })
            .collect();
        v.sort();
        v.into_iter().map(|(_, id)| id).collect()
    }

    pub fn inner_ancillas(&self) -> Vec<QubitId> {
        let mut v: Vec<(usize, QubitId)> = self
            .qubits
            .iter()
            .enumerate()
            .filter_map(|(id, q)| match q.role {
                QubitRole::InnerAncilla(i) => Some((i, id)),
                _ => None,
            })
            .collect();
        v.sort();
        v.into_iter().map(|(_, id)| id).collect()
    }

    pub fn ancilla_count(&self) -> usize {
        self.qubits.iter().filter(|q| q.role != QubitRole::Target).count()
    }

    pub fn measurement_of(&self, q: QubitId) -> Option<Basis> {
        self.measurements.iter().find(|m| m.qubit == q).map(|m| m.basis)
    }

    pub fn set_target_state(&mut self, init: InitialState) {
        if let Some(t) = self.target() {
            self.qubits[t].init = init;
        }
    }

    /// Replace (or add) the target's measurement prescription.
    pub fn set_target_basis(&mut self, basis: Basis) {
        if let Some(t) = self.target() {
            self.measurements.retain(|m| m.qubit != t);
            self.measurements.push(Measurement { qubit: t, basis });
        }
    }

    /// Check registry, operand and measurement invariants.
    pub fn validate(&self) -> Result<()> {
        let nq = self.num_qubits();
        let targets = self.qubits.iter().filter(|q| q.role == QubitRole::Target).count();
        if nq > 0 && targets != 1 {
            return Err(Error::Validation(format!("{targets} target qubits, expected exactly one")));
        }
        for (kind, indices) in [("outer", self.role_indices(true)), ("inner", self.role_indices(false))] {
            if indices.iter().enumerate().any(|(i, &idx)| i != idx) {
                return Err(Error::Validation(format!("{kind} ancilla indices are not contiguous from 0")));
            }
        }
        for (id, q) in self.qubits.iter().enumerate() {
            if q.init == InitialState::Input && q.role != QubitRole::Target {
                return Err(Error::Validation(format!("qubit {id} ({}) has an arbitrary input", q.role)));
            }
        }
        for g in &self.gates {
            let ops = g.qubits();
            if ops.iter().any(|&q| q >= nq) {
                return Err(Error::Validation(format!("gate `{g}` addresses a missing qubit")));
            }
            for i in 0..ops.len() {
                if ops[i + 1..].contains(&ops[i]) {
                    return Err(Error::Validation(format!("gate `{g}` repeats an operand")));
                }
            }
        }
        let mut seen = vec![false; nq];
        for m in &self.measurements {
            if m.qubit >= nq {
                return Err(Error::Validation(format!("measurement of missing qubit {}", m.qubit)));
            }
            if std::mem::replace(&mut seen[m.qubit], true) {
                return Err(Error::Validation(format!("qubit {} measured twice", m.qubit)));
            }
        }
        Ok(())
    }

    fn role_indices(&self, outer: bool) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .qubits
            .iter()
            .filter_map(|q| match (q.role, outer) {
                (QubitRole::OuterAncilla(i), true) | (QubitRole::InnerAncilla(i), false) => Some(i),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    /// The circuit as executed on hardware with only computational readout:
    /// basis changes become explicit trailing gates, inverted controls become
    /// X pairs and every measurement is in Z.
    pub fn lowered(&self) -> Circuit {
        let mut out = Circuit { qubits: self.qubits.clone(), gates: Vec::new(), measurements: Vec::new() };
        out.gates = self.gates.iter().flat_map(Gate::expand_inverted_controls).collect();
        for m in &self.measurements {
            out.gates.extend(m.basis.change_gates(m.qubit));
            out.measurements.push(Measurement { qubit: m.qubit, basis: Basis::Z });
        }
        out
    }

    /// Drop a qubit that no gate or measurement touches, renumbering the rest.
    pub fn remove_qubit(&mut self, q: QubitId) -> Result<()> {
        if self.gates.iter().any(|g| g.acts_on(q)) || self.measurements.iter().any(|m| m.qubit == q) {
            return Err(Error::Internal(format!("qubit {q} is still in use")));
        }
        let removed = self.qubits.remove(q);
        let shift = |id: QubitId| if id > q { id - 1 } else { id };
        self.gates = self.gates.iter().map(|g| g.remap(shift)).collect();
        for m in &mut self.measurements {
            m.qubit = shift(m.qubit);
        }
        // Keep role indices contiguous.
        if let QubitRole::InnerAncilla(r) | QubitRole::OuterAncilla(r) = removed.role {
            let outer = matches!(removed.role, QubitRole::OuterAncilla(_));
            for spec in &mut self.qubits {
                match &mut spec.role {
                    QubitRole::InnerAncilla(i) if !outer && *i > r => *i -= 1,
                    QubitRole::OuterAncilla(i) if outer && *i > r => *i -= 1,
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Per-kind gate counts. Inverted-control Toffolis count as one Toffoli plus
/// two X gates per inverted control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub h: usize,
    pub x: usize,
    pub s: usize,
    pub sdg: usize,
    pub z: usize,
    pub cnot: usize,
    pub toffoli: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.h + self.x + self.s + self.sdg + self.z + self.cnot + self.toffoli
    }

    pub fn as_map(&self) -> BTreeMap<&'static str, usize> {
        BTreeMap::from([
            ("h", self.h),
            ("x", self.x),
            ("s", self.s),
            ("sdg", self.sdg),
            ("z", self.z),
            ("cnot", self.cnot),
            ("toffoli", self.toffoli),
        ])
    }

    /// Signed `self - other` per kind.
    pub fn delta(&self, other: &Census) -> BTreeMap<&'static str, i64> {
        let a = self.as_map();
        let b = other.as_map();
        a.iter().map(|(k, &v)| (*k, v as i64 - b[k] as i64)).collect()
    }
}

pub fn gate_census(c: &Circuit) -> Census {
    let mut census = Census::default();
    for g in &c.gates {
        match g {
            Gate::H(_) => census.h += 1,
            Gate::X(_) => census.x += 1,
            Gate::S(_) => census.s += 1,
            Gate::Sdg(_) => census.sdg += 1,
            Gate::Z(_) => census.z += 1,
            Gate::Cnot { .. } => census.cnot += 1,
            Gate::Toffoli { .. } => census.toffoli += 1,
            Gate::ToffoliInvCtl { inverted, .. } => {
                census.toffoli += 1;
                census.x += 2 * inverted.iter().filter(|&&b| b).count();
            }
        }
    }
    census
}

/// Census of the circuit with measurement basis changes written out, i.e. as
/// run on a device that only reads out in Z.
pub fn executed_census(c: &Circuit) -> Census {
    gate_census(&c.lowered())
}

/// Dense unitary of the gate list, preparations and measurements ignored.
///
/// Each gate's local matrix is assembled from Kronecker products and applied
/// to every column of the running product.
pub fn to_unitary(c: &Circuit) -> Result<CMatrix> {
    let nq = c.num_qubits();
    if nq > MAX_UNITARY_QUBITS {
        return Err(Error::Size(nq, MAX_UNITARY_QUBITS));
    }
    let dim = 1usize << nq;
    // Column-major working copy: column j is U|j⟩.
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|j| {
            let mut v = vec![ZERO; dim];
            v[j] = ONE;
            v
        })
        .collect();
    for g in &c.gates {
        let ops = g.qubits();
        if ops.iter().any(|&q| q >= nq) {
            return Err(Error::Validation(format!("gate `{g}` addresses a missing qubit")));
        }
        let local = g.local_matrix();
        let k = ops.len();
        let mask: usize = ops.iter().map(|&q| 1usize << q).sum();
        for col in cols.iter_mut() {
            apply_local(col, &local, &ops, k, mask);
        }
    }
    let mut u = CMatrix::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    Ok(u)
}

fn apply_local(v: &mut [C64], local: &CMatrix, ops: &[QubitId], k: usize, mask: usize) {
    let sub = 1usize << k;
    let mut gathered = vec![ZERO; sub];
    let offset = |base: usize, s: usize| {
        let mut idx = base;
        for (pos, &q) in ops.iter().enumerate() {
            // first listed operand is the most significant local bit
            if (s >> (k - 1 - pos)) & 1 == 1 {
                idx |= 1 << q;
            }
        }
        idx
    };
    for base in 0..v.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, slot) in gathered.iter_mut().enumerate() {
            *slot = v[offset(base, s)];
        }
        for r in 0..sub {
            let mut acc = ZERO;
            for (s, &amp) in gathered.iter().enumerate() {
                acc += local[(r, s)] * amp;
            }
            v[offset(base, r)] = acc;
        }
    }
}
