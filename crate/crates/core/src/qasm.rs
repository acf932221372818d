//! OpenQASM 3 subset: emission and the matching parser.
//!
//! Layout of an emitted file:
//!
//! ```text
//! OPENQASM 3.0;
//! include "stdgates.inc";
//! qubit[3] q;
//! bit[3] c;
//! // q[0] target
//! // q[1] outer 0
//! // q[2] inner 0 final 1
//! // preparation
//! reset q[1];
//! h q[1];
//! // gates
//! ccx q[1], q[2], q[0];
//! // readout
//! h q[1];
//! c[0] = measure q[1];
//! ```
//!
//! Qubits prepared in `|0⟩` get no preparation lines. Inverted controls are
//! written as X conjugation and come back as plain Toffolis.

use std::fmt::Write as _;

use crate::circuit::{Basis, Circuit, Gate, InitialState, Measurement, QubitRole, QubitSpec};
use crate::error::{Error, Result};

const HEADER: &str = "OPENQASM 3.0;\ninclude \"stdgates.inc\";\n";

fn gate_line(out: &mut String, g: &Gate) {
    let _ = match *g {
        Gate::H(q) => writeln!(out, "h q[{q}];"),
        Gate::X(q) => writeln!(out, "x q[{q}];"),
        Gate::S(q) => writeln!(out, "s q[{q}];"),
        Gate::Sdg(q) => writeln!(out, "sdg q[{q}];"),
        Gate::Z(q) => writeln!(out, "z q[{q}];"),
        Gate::Cnot { control, target } => writeln!(out, "cx q[{control}], q[{target}];"),
        Gate::Toffoli { controls: [a, b], target } => writeln!(out, "ccx q[{a}], q[{b}], q[{target}];"),
        Gate::ToffoliInvCtl { .. } => {
            for e in g.expand_inverted_controls() {
                gate_line(out, &e);
            }
            Ok(())
        }
    };
}

fn prep_gates(init: InitialState, q: usize) -> Vec<Gate> {
    match init {
        InitialState::Zero | InitialState::Input => vec![],
        InitialState::One => vec![Gate::X(q)],
        InitialState::Plus => vec![Gate::H(q)],
        InitialState::PlusI => vec![Gate::H(q), Gate::S(q)],
    }
}

fn role_comment(id: usize, spec: &QubitSpec) -> String {
    let mut s = format!("// q[{id}] {}", spec.role);
    if spec.init == InitialState::Input {
        s.push_str(" input");
    }
    if let Some(b) = spec.known_final {
        let _ = write!(s, " final {}", b as u8);
    }
    s
}

/// Deterministic text of `c`.
pub fn emit_qasm(c: &Circuit) -> String {
    let mut out = String::from(HEADER);
    let _ = writeln!(out, "qubit[{}] q;", c.num_qubits());
    if !c.measurements.is_empty() {
        let _ = writeln!(out, "bit[{}] c;", c.measurements.len());
    }
    for (id, spec) in c.qubits.iter().enumerate() {
        out.push_str(&role_comment(id, spec));
        out.push('\n');
    }
    if c.qubits.iter().any(|q| !prep_gates(q.init, 0).is_empty()) {
        out.push_str("// preparation\n");
        for (id, spec) in c.qubits.iter().enumerate() {
            let prep = prep_gates(spec.init, id);
            if !prep.is_empty() {
                let _ = writeln!(out, "reset q[{id}];");
                for g in prep {
                    gate_line(&mut out, &g);
                }
            }
        }
    }
    if !c.gates.is_empty() {
        out.push_str("// gates\n");
        for g in &c.gates {
            gate_line(&mut out, g);
        }
    }
    if !c.measurements.is_empty() {
        out.push_str("// readout\n");
        for m in &c.measurements {
            for g in m.basis.change_gates(m.qubit) {
                gate_line(&mut out, &g);
            }
        }
        for (bit, m) in c.measurements.iter().enumerate() {
            let _ = writeln!(out, "c[{bit}] = measure q[{}];", m.qubit);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Preparation,
    Gates,
    Readout,
}

struct Parser {
    line: usize,
}

impl Parser {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn qubit(&self, s: &str, nq: usize) -> Result<usize> {
        let s = s.trim();
        let idx = s
            .strip_prefix("q[")
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| self.err(format!("expected q[i], found `{s}`")))?;
        let q: usize = idx.parse().map_err(|_| self.err(format!("bad qubit index `{idx}`")))?;
        if q >= nq {
            return Err(self.err(format!("qubit {q} not declared")));
        }
        Ok(q)
    }

    fn declared(&self, line: &str, kind: &str, name: &str) -> Result<Option<usize>> {
        let Some(rest) = line.strip_prefix(kind).and_then(|r| r.strip_prefix('[')) else {
            return Ok(None);
        };
        let (n, tail) = rest.split_once(']').ok_or_else(|| self.err("unterminated register size"))?;
        if tail.trim() != name {
            return Err(self.err(format!("register must be named `{name}`")));
        }
        n.parse().map(Some).map_err(|_| self.err(format!("bad register size `{n}`")))
    }

    fn role<'a, 'b>(&self, words: &'a [&'b str]) -> Result<(QubitRole, &'a [&'b str])> {
        let index = |w: Option<&&str>| -> Result<usize> {
            w.and_then(|w| w.parse().ok()).ok_or_else(|| self.err("missing ancilla index"))
        };
        match words.first() {
            Some(&"target") => Ok((QubitRole::Target, &words[1..])),
            Some(&"outer") => Ok((QubitRole::OuterAncilla(index(words.get(1))?), &words[2..])),
            Some(&"inner") => Ok((QubitRole::InnerAncilla(index(words.get(1))?), &words[2..])),
            _ => Err(self.err("unknown qubit role")),
        }
    }
}

/// Parse text produced by [`emit_qasm`] back into a circuit.
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut p = Parser { line: 0 };
    let mut nq: Option<usize> = None;
    let mut nbits = 0usize;
    let mut roles: Vec<Option<(QubitRole, bool, Option<bool>)>> = Vec::new();
    let mut prep: Vec<Option<Vec<Gate>>> = Vec::new();
    let mut pending: Vec<Vec<Gate>> = Vec::new();
    let mut measured: Vec<Option<Measurement>> = Vec::new();
    let mut gates = Vec::new();
    let mut section = Section::Preamble;
    let mut seen_version = false;

    for (i, raw) in text.lines().enumerate() {
        p.line = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix("//") {
            let words: Vec<&str> = comment.split_whitespace().collect();
            match words.as_slice() {
                ["preparation"] => section = Section::Preparation,
                ["gates"] => section = Section::Gates,
                ["readout"] => section = Section::Readout,
                [q, rest @ ..] if q.starts_with("q[") => {
                    let n = nq.ok_or_else(|| p.err("role comment before qubit declaration"))?;
                    let id = p.qubit(q, n)?;
                    let (role, mut tail) = p.role(rest)?;
                    let mut input = false;
                    let mut fin = None;
                    loop {
                        match tail {
                            ["input", r @ ..] => {
                                input = true;
                                tail = r;
                            }
                            ["final", b, r @ ..] => {
                                fin = Some(match *b {
                                    "0" => false,
                                    "1" => true,
                                    _ => return Err(p.err("final state must be 0 or 1")),
                                });
                                tail = r;
                            }
                            [] => break,
                            _ => return Err(p.err(format!("unexpected `{}` in role comment", tail.join(" ")))),
                        }
                    }
                    if roles[id].replace((role, input, fin)).is_some() {
                        return Err(p.err(format!("role of q[{id}] given twice")));
                    }
                }
                _ => {}
            }
            continue;
        }
        let stmt = line.strip_suffix(';').ok_or_else(|| p.err("missing `;`"))?.trim();
        if stmt == "OPENQASM 3.0" || stmt == "OPENQASM 3" {
            seen_version = true;
            continue;
        }
        if !seen_version {
            return Err(p.err("missing OPENQASM 3 version header"));
        }
        if stmt == "include \"stdgates.inc\"" {
            continue;
        }
        if let Some(n) = p.declared(stmt, "qubit", "q")? {
            if nq.replace(n).is_some() {
                return Err(p.err("qubit register declared twice"));
            }
            roles = vec![None; n];
            prep = vec![None; n];
            pending = vec![Vec::new(); n];
            continue;
        }
        let n = nq.ok_or_else(|| p.err("statement before qubit declaration"))?;
        if let Some(b) = p.declared(stmt, "bit", "c")? {
            nbits = b;
            measured = vec![None; b];
            continue;
        }
        if let Some((lhs, rhs)) = stmt.split_once('=') {
            let bit = lhs
                .trim()
                .strip_prefix("c[")
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.parse::<usize>().ok())
                .filter(|&b| b < nbits)
                .ok_or_else(|| p.err(format!("bad classical bit `{}`", lhs.trim())))?;
            let q = p.qubit(
                rhs.trim().strip_prefix("measure").ok_or_else(|| p.err("expected `measure`"))?,
                n,
            )?;
            section = Section::Readout;
            let basis = match std::mem::take(&mut pending[q]).as_slice() {
                [] => Basis::Z,
                [Gate::H(_)] => Basis::X,
                [Gate::Sdg(_), Gate::H(_)] => Basis::Y,
                other => return Err(p.err(format!("q[{q}] has an unrecognized basis change ({} gates)", other.len()))),
            };
            if measured[bit].replace(Measurement { qubit: q, basis }).is_some() {
                return Err(p.err(format!("c[{bit}] assigned twice")));
            }
            continue;
        }
        if let Some(q) = stmt.strip_prefix("reset ") {
            let q = p.qubit(q, n)?;
            if section != Section::Preparation || prep[q].replace(Vec::new()).is_some() {
                return Err(p.err("reset is only allowed once per qubit in the preparation section"));
            }
            continue;
        }
        let (name, args) = stmt.split_once(' ').ok_or_else(|| p.err(format!("unrecognized statement `{stmt}`")))?;
        let qs = args.split(',').map(|a| p.qubit(a, n)).collect::<Result<Vec<_>>>()?;
        let g = match (name, qs.as_slice()) {
            ("h", &[q]) => Gate::H(q),
            ("x", &[q]) => Gate::X(q),
            ("s", &[q]) => Gate::S(q),
            ("sdg", &[q]) => Gate::Sdg(q),
            ("z", &[q]) => Gate::Z(q),
            ("cx", &[a, b]) => Gate::Cnot { control: a, target: b },
            ("ccx", &[a, b, t]) => Gate::Toffoli { controls: [a, b], target: t },
            _ => return Err(p.err(format!("unsupported gate `{name}` with {} operands", qs.len()))),
        };
        match section {
            Section::Preparation => {
                let q = g.qubits()[0];
                prep[q].as_mut().ok_or_else(|| p.err(format!("preparation of q[{q}] without reset")))?.push(g);
            }
            Section::Readout => {
                let q = g.qubits()[0];
                if g.qubits().len() != 1 {
                    return Err(p.err("multi-qubit gate in readout section"));
                }
                pending[q].push(g);
            }
            Section::Preamble | Section::Gates => gates.push(g),
        }
    }

    let n = nq.ok_or(Error::Parse { line: p.line, msg: "no qubit declaration".into() })?;
    if let Some(q) = pending.iter().position(|v| !v.is_empty()) {
        return Err(p.err(format!("basis change on q[{q}] without a measurement")));
    }
    let mut c = Circuit::new();
    for id in 0..n {
        let (role, input, known_final) = roles[id].ok_or_else(|| p.err(format!("no role comment for q[{id}]")))?;
        let init = match prep[id].as_deref() {
            None => {
                if input {
                    InitialState::Input
                } else {
                    InitialState::Zero
                }
            }
            Some([]) => InitialState::Zero,
            Some([Gate::X(_)]) => InitialState::One,
            Some([Gate::H(_)]) => InitialState::Plus,
            Some([Gate::H(_), Gate::S(_)]) => InitialState::PlusI,
            Some(_) => return Err(p.err(format!("unrecognized preparation of q[{id}]"))),
        };
        if input && init != InitialState::Input {
            return Err(p.err(format!("q[{id}] is marked as input but prepared")));
        }
        c.qubits.push(QubitSpec { role, init, known_final });
    }
    c.gates = gates;
    c.measurements = measured
        .into_iter()
        .enumerate()
        .map(|(b, m)| m.ok_or_else(|| p.err(format!("c[{b}] is never assigned"))))
        .collect::<Result<_>>()?;
    c.validate()?;
    Ok(c)
}
