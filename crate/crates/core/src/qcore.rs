//! Small dense complex linear algebra: matrices, Kronecker products, Pauli
//! and gate matrices, single-qubit density and Choi matrices.
//!
//! Qubit 0 is the least significant bit of every basis-state index. Matrix
//! Kronecker products follow the textbook convention, so in `kron(a, b)` the
//! factor `a` owns the high-order index bits.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest row or column count a matrix built by [`kron`] may have.
pub const MAX_DIM: usize = 1 << 16;

/// Tolerance for exact algebra.
pub const TOL_EXACT: f64 = 1e-12;
/// Tolerance for accumulated products.
pub const TOL_ACCUM: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data: Vec<C64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self::from_vec(r, cols, data)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.max_abs())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let prod = self.adjoint().matmul(self).expect("square");
        prod.max_abs_diff(&CMatrix::identity(self.rows)) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.rows.checked_mul(b.rows).filter(|&r| r <= MAX_DIM);
    let cols = a.cols.checked_mul(b.cols).filter(|&c| c <= MAX_DIM);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        _ => return Err(Error::Size(a.rows.max(a.cols) * b.rows.max(b.cols), MAX_DIM)),
    };
    let mut out = CMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x * b[(bi, bj)];
                }
            }
        }
    }
    Ok(out)
}

pub mod gates {
    //! Standard gate matrices. `rz(θ)` is the phase rotation `diag(1, e^{iθ})`.
    use super::*;

    pub fn x() -> CMatrix {
        CMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn y() -> CMatrix {
        CMatrix::from_vec(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn z() -> CMatrix {
        CMatrix::diag(&[ONE, -ONE])
    }

    pub fn h() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_vec(2, 2, vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]).unwrap()
    }

    pub fn s() -> CMatrix {
        CMatrix::diag(&[ONE, I])
    }

    pub fn sdg() -> CMatrix {
        CMatrix::diag(&[ONE, -I])
    }

    pub fn t() -> CMatrix {
        rz(std::f64::consts::FRAC_PI_4)
    }

    pub fn rz(theta: f64) -> CMatrix {
        CMatrix::diag(&[ONE, C64::from_polar(1.0, theta)])
    }

    pub fn projector(bit: usize) -> CMatrix {
        if bit == 0 {
            CMatrix::diag(&[ONE, ZERO])
        } else {
            CMatrix::diag(&[ZERO, ONE])
        }
    }
}

fn check_2x2(m: &CMatrix, what: &str) -> Result<()> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::Shape(format!("{what} must be 2x2, got {}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

/// Single-qubit density matrix. Hermitian with unit trace; positivity is not
/// enforced because linear-inversion estimates may leave the Bloch ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix1Q(CMatrix);

impl DensityMatrix1Q {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_2x2(&m, "density matrix")?;
        if !m.is_hermitian(TOL_EXACT) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        if (m.trace() - ONE).norm() > TOL_EXACT {
            return Err(Error::Validation(format!("density matrix trace {}", m.trace())));
        }
        Ok(DensityMatrix1Q(m))
    }

    /// `(I + x X + y Y + z Z) / 2`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Self {
        let h = 0.5;
        DensityMatrix1Q(
            CMatrix::from_vec(
                2,
                2,
                vec![c(h * (1.0 + z), 0.0), c(h * x, -h * y), c(h * x, h * y), c(h * (1.0 - z), 0.0)],
            )
            .expect("finite bloch vector"),
        )
    }

    pub fn from_pure(psi: [C64; 2]) -> Self {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        let mut m = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = psi[i] * psi[j].conj() / norm;
            }
        }
        DensityMatrix1Q(m)
    }

    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0;
        [2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        check_2x2(u, "unitary")?;
        let m = u.matmul(&self.0)?.matmul(&u.adjoint())?;
        Ok(DensityMatrix1Q(m))
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalised pure state.
    pub fn fidelity_with_pure(&self, psi: [C64; 2]) -> f64 {
        let rho_psi = self.0.mul_vec(&psi).expect("2x2");
        psi.iter().zip(&rho_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Unnormalised Choi matrix of a single-qubit channel,
/// `C = Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, trace 2 for trace-preserving maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix1Q(CMatrix);

impl ChoiMatrix1Q {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::Shape(format!("Choi matrix must be 4x4, got {}x{}", m.rows(), m.cols())));
        }
        if !m.is_hermitian(TOL_ACCUM) {
            return Err(Error::Validation("Choi matrix is not Hermitian".into()));
        }
        Ok(ChoiMatrix1Q(m))
    }

    /// Assemble from the channel's action on the four matrix units `E(|i⟩⟨j|)`,
    /// indexed `[i][j]`.
    pub fn from_blocks(blocks: &[[CMatrix; 2]; 2]) -> Result<Self> {
        let mut m = CMatrix::zeros(4, 4);
        for (i, row) in blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                check_2x2(b, "channel block")?;
                for r in 0..2 {
                    for s in 0..2 {
                        m[(2 * i + r, 2 * j + s)] = b[(r, s)];
                    }
                }
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}

/// Choi matrix `|v⟩⟨v|` of `ρ ↦ UρU†`, with `|v⟩ = Σ_i |i⟩ ⊗ U|i⟩`.
pub fn unitary_choi(u: &CMatrix) -> Result<ChoiMatrix1Q> {
    check_2x2(u, "unitary")?;
    if !u.is_unitary(TOL_EXACT) {
        return Err(Error::Validation("matrix is not unitary".into()));
    }
    let mut v = [ZERO; 4];
    for i in 0..2 {
        for out in 0..2 {
            v[2 * i + out] = u[(out, i)];
        }
    }
    let mut m = CMatrix::zeros(4, 4);
    for a in 0..4 {
        for b in 0..4 {
            m[(a, b)] = v[a] * v[b].conj();
        }
    }
    ChoiMatrix1Q::new(m)
}

#[cfg(test)]
mod tests {
    use super::gates::*;
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn kron_identity() {
        let i4 = kron(&CMatrix::identity(2), &CMatrix::identity(2)).unwrap();
        assert_eq!(i4, CMatrix::identity(4));
    }

    #[test]
    fn kron_z_identity_is_diagonal() {
        let m = kron(&z(), &CMatrix::identity(2)).unwrap();
        assert_eq!(m, CMatrix::diag(&[ONE, ONE, -ONE, -ONE]));
    }

    #[test]
    fn kron_xx_flips_both_bits() {
        let m = kron(&x(), &x()).unwrap();
        let out = m.mul_vec(&[ONE, ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(out, vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn kron_rejects_oversized_result() {
        let big = CMatrix::identity(1 << 9);
        assert!(matches!(kron(&big, &big), Err(Error::Size(..))));
    }

    #[test]
    fn choi_of_identity_and_z() {
        let ci = unitary_choi(&CMatrix::identity(2)).unwrap();
        let cz = unitary_choi(&z()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let corner = (a == 0 || a == 3) && (b == 0 || b == 3);
                let want_i = if corner { ONE } else { ZERO };
                assert_eq!(ci.matrix()[(a, b)], want_i);
                let want_z = if corner && a != b { -ONE } else { want_i };
                assert_eq!(cz.matrix()[(a, b)], want_z);
            }
        }
        assert!((ci.trace() - 2.0).abs() < TOL_EXACT);
    }

    #[test]
    fn choi_of_t_matches_brute_force_outer_product() {
        // v = |0⟩⊗T|0⟩ + |1⟩⊗T|1⟩ = |00⟩ + e^{iπ/4}|11⟩, written out by hand.
        let phase = C64::from_polar(1.0, FRAC_PI_4);
        let v = [ONE, ZERO, ZERO, phase];
        let ct = unitary_choi(&t()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let want = v[a] * v[b].conj();
                assert!((ct.matrix()[(a, b)] - want).norm() < TOL_EXACT);
            }
        }
        assert!((ct.matrix()[(0, 3)] - C64::from_polar(1.0, -FRAC_PI_4)).norm() < TOL_EXACT);
    }

    #[test]
    fn choi_rejects_non_unitary() {
        let m = CMatrix::diag(&[ONE, c(2.0, 0.0)]);
        assert!(matches!(unitary_choi(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn bloch_round_trip() {
        let rho = DensityMatrix1Q::from_bloch(0.3, -0.2, 0.5);
        let b = rho.bloch();
        assert!((b[0] - 0.3).abs() < 1e-15 && (b[1] + 0.2).abs() < 1e-15 && (b[2] - 0.5).abs() < 1e-15);
        assert!(DensityMatrix1Q::new(rho.matrix().clone()).is_ok());
    }
}
