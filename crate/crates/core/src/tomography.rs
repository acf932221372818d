//! Linear-inversion state and process tomography of the heralded channels.

use serde::{Deserialize, Serialize};

use crate::builder::Branch;
use crate::circuit::{Basis, InitialState};
use crate::error::{Error, Result};
use crate::qcore::{gates, unitary_choi, CMatrix, ChoiMatrix1Q, DensityMatrix1Q, C64, I};

pub const DEFAULT_MIN_SHOTS: u64 = 100;

/// Input states of the process tomography, in reconstruction order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProbeState {
    Zero,
    One,
    Plus,
    PlusI,
}

impl ProbeState {
    pub const ALL: [ProbeState; 4] = [ProbeState::Zero, ProbeState::One, ProbeState::Plus, ProbeState::PlusI];

    pub fn initial_state(self) -> InitialState {
        match self {
            ProbeState::Zero => InitialState::Zero,
            ProbeState::One => InitialState::One,
            ProbeState::Plus => InitialState::Plus,
            ProbeState::PlusI => InitialState::PlusI,
        }
    }

    pub fn label(self) -> &'static str {
        self.initial_state().label()
    }

    fn index(self) -> usize {
        self as usize
    }
}

fn basis_index(b: Basis) -> usize {
    match b {
        Basis::X => 0,
        Basis::Y => 1,
        Basis::Z => 2,
    }
}

/// `(n₀ − n₁)/(n₀ + n₁)`.
pub fn expectation(counts: [u64; 2]) -> Result<f64> {
    let total = counts[0] + counts[1];
    if total == 0 {
        return Err(Error::InsufficientData("no shots in tomography cell".into()));
    }
    Ok((counts[0] as f64 - counts[1] as f64) / total as f64)
}

/// `ρ = (I + ⟨X⟩X + ⟨Y⟩Y + ⟨Z⟩Z)/2`, without projecting onto physical states.
pub fn reconstruct_state(x: f64, y: f64, z: f64) -> Result<DensityMatrix1Q> {
    for e in [x, y, z] {
        if !(-1.0..=1.0).contains(&e) {
            return Err(Error::Validation(format!("expectation value {e} outside [−1, 1]")));
        }
    }
    Ok(DensityMatrix1Q::from_bloch(x, y, z))
}

/// Choi matrix from the images of `|0⟩, |1⟩, |+⟩, |+i⟩`.
pub fn reconstruct_channel(outputs: &[DensityMatrix1Q; 4]) -> Result<ChoiMatrix1Q> {
    let [r0, r1, rp, ri] = outputs.each_ref().map(|r| r.matrix().clone());
    let diag = r0.add(&r1)?;
    let e01 = rp.add(&ri.scale(I))?.sub(&diag.scale(C64::new(0.5, 0.5)))?;
    let e10 = rp.sub(&ri.scale(I))?.sub(&diag.scale(C64::new(0.5, -0.5)))?;
    ChoiMatrix1Q::from_blocks(&[[r0, e01], [e10, r1]])
}

/// `Re Tr[C_U C_E] / 4`.
pub fn process_fidelity(e: &ChoiMatrix1Q, u: &CMatrix) -> Result<f64> {
    let cu = unitary_choi(u)?;
    let tr = cu.matrix().matmul(e.matrix())?.trace();
    if tr.im.abs() > 1e-8 {
        return Err(Error::Internal(format!("process fidelity has imaginary part {}", tr.im)));
    }
    Ok(tr.re / 4.0)
}

/// Average gate fidelity of a qubit channel from its process fidelity.
pub fn agf(pf: f64) -> f64 {
    (2.0 * pf + 1.0) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    T,
    Z,
}

impl Reference {
    pub fn unitary(self) -> CMatrix {
        match self {
            Reference::T => gates::t(),
            Reference::Z => gates::z(),
        }
    }

    pub fn for_branch(b: Branch) -> Self {
        match b {
            Branch::AppliedTstar => Reference::T,
            Branch::AppliedZstar => Reference::Z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub choi: ChoiMatrix1Q,
    pub pf: f64,
    pub agf: f64,
    pub reference: Reference,
}

impl ChannelEstimate {
    pub fn new(choi: ChoiMatrix1Q, reference: Reference) -> Result<Self> {
        let pf = process_fidelity(&choi, &reference.unitary())?;
        Ok(ChannelEstimate { choi, pf, agf: agf(pf), reference })
    }

    pub fn to_json(&self) -> ChannelEstimateJson {
        let m = self.choi.matrix();
        ChannelEstimateJson {
            reference: self.reference,
            pf: self.pf,
            agf: self.agf,
            choi: (0..4).map(|r| (0..4).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect(),
        }
    }

    pub fn from_json(j: &ChannelEstimateJson) -> Result<Self> {
        if j.choi.len() != 4 || j.choi.iter().any(|row| row.len() != 4) {
            return Err(Error::Schema("Choi matrix must be 4x4".into()));
        }
        let data = j.choi.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
        let choi = ChoiMatrix1Q::new(CMatrix::from_vec(4, 4, data)?)?;
        Ok(ChannelEstimate { choi, pf: j.pf, agf: j.agf, reference: j.reference })
    }
}

/// Serialized form: Choi entries as `[re, im]` pairs, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimateJson {
    pub reference: Reference,
    pub pf: f64,
    pub agf: f64,
    pub choi: Vec<Vec<[f64; 2]>>,
}

/// Branch-conditioned target readouts `[n₀, n₁]` for every probe state and
/// measurement basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TomographyDataset {
    pub min_shots: u64,
    /// Indexed `[probe][basis]`, bases in X, Y, Z order.
    pub tstar: [[[u64; 2]; 3]; 4],
    pub zstar: [[[u64; 2]; 3]; 4],
}

impl Default for TomographyDataset {
    fn default() -> Self {
        Self::new(DEFAULT_MIN_SHOTS)
    }
}

impl TomographyDataset {
    pub fn new(min_shots: u64) -> Self {
        TomographyDataset { min_shots, tstar: [[[0; 2]; 3]; 4], zstar: [[[0; 2]; 3]; 4] }
    }

    fn table(&self, b: Branch) -> &[[[u64; 2]; 3]; 4] {
        match b {
            Branch::AppliedTstar => &self.tstar,
            Branch::AppliedZstar => &self.zstar,
        }
    }

    pub fn add(&mut self, b: Branch, probe: ProbeState, basis: Basis, counts: [u64; 2]) {
        let t = match b {
            Branch::AppliedTstar => &mut self.tstar,
            Branch::AppliedZstar => &mut self.zstar,
        };
        let cell = &mut t[probe.index()][basis_index(basis)];
        cell[0] += counts[0];
        cell[1] += counts[1];
    }

    pub fn cell(&self, b: Branch, probe: ProbeState, basis: Basis) -> [u64; 2] {
        self.table(b)[probe.index()][basis_index(basis)]
    }

    /// Total shots recorded for a branch.
    pub fn branch_shots(&self, b: Branch) -> u64 {
        self.table(b).iter().flatten().map(|c| c[0] + c[1]).sum()
    }

    pub fn output_state(&self, b: Branch, probe: ProbeState) -> Result<DensityMatrix1Q> {
        let mut e = [0.0; 3];
        for basis in Basis::ALL {
            let counts = self.cell(b, probe, basis);
            let total = counts[0] + counts[1];
            if total < self.min_shots {
                return Err(Error::InsufficientData(format!(
                    "{b:?} branch, input {}, basis {basis}: {total} shots < {}",
                    probe.label(),
                    self.min_shots
                )));
            }
            e[basis_index(basis)] = expectation(counts)?;
        }
        reconstruct_state(e[0], e[1], e[2])
    }

    pub fn channel(&self, b: Branch) -> Result<ChoiMatrix1Q> {
        let states = [
            self.output_state(b, ProbeState::Zero)?,
            self.output_state(b, ProbeState::One)?,
            self.output_state(b, ProbeState::Plus)?,
            self.output_state(b, ProbeState::PlusI)?,
        ];
        reconstruct_channel(&states)
    }

    pub fn estimate(&self, b: Branch) -> Result<ChannelEstimate> {
        ChannelEstimate::new(self.channel(b)?, Reference::for_branch(b))
    }
}

/// Identity channel outputs for the probe states.
pub fn probe_density(p: ProbeState) -> DensityMatrix1Q {
    DensityMatrix1Q::from_pure(p.initial_state().amplitudes().expect("probe states are prescribed"))
}
