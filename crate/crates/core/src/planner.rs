//! Resolution of a target angle into comparator parameters.
//!
//! A rotation `R_θ = diag(1, e^{iθ})` is approximated by comparing an
//! `n`-bit ancilla register against a classical constant `k`. The realised
//! angle is `θ* = 2·atan((k − 2^{n−1}) / 2^{n−1})`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ancilla count the planner will produce; keeps `k` and the
/// probability arithmetic exact in `u64`/`f64`.
pub const MAX_N: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationPlan {
    pub theta: f64,
    pub epsilon: Option<f64>,
    pub n: u32,
    /// Comparison constant. Lies in `[2^{n−1}, 2^n)` for `θ ≥ 0`; negative
    /// angles give `k < 2^{n−1}` and are built by mirroring.
    pub k: u64,
    pub theta_star: f64,
    pub p_success: f64,
    pub reduced: bool,
}

impl RotationPlan {
    /// Plan from a tolerance, deriving `n` and reducing `k`.
    pub fn from_epsilon(theta: f64, epsilon: f64) -> Result<Self> {
        let n = choose_n(epsilon)?;
        let mut plan = Self::build(theta, n, true)?;
        plan.epsilon = Some(epsilon);
        Ok(plan)
    }

    /// Plan for a caller-chosen `n`; `reduce` strips trailing zero bits of `k`.
    pub fn from_n(theta: f64, n: u32, reduce: bool) -> Result<Self> {
        Self::build(theta, n, reduce)
    }

    fn build(theta: f64, n: u32, do_reduce: bool) -> Result<Self> {
        let k0 = choose_k(theta, n)?;
        let (k, n) = if do_reduce { reduce(k0, n) } else { (k0, n) };
        Ok(RotationPlan {
            theta,
            epsilon: None,
            n,
            k,
            theta_star: theta_star(k, n),
            p_success: success_probability(k, n),
            reduced: do_reduce,
        })
    }

    /// Signed offset `k − 2^{n−1}`.
    pub fn offset(&self) -> i64 {
        self.k as i64 - half(self.n) as i64
    }

    pub fn angle_error(&self) -> f64 {
        (self.theta - self.theta_star).abs()
    }
}

fn half(n: u32) -> u64 {
    1u64 << (n - 1)
}

/// Smallest `n` with `n ≥ 1 + ⌈log₂(1/ε)⌉`.
pub fn choose_n(epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < std::f64::consts::PI) {
        return Err(Error::Domain(format!("tolerance must lie in (0, π), got {epsilon}")));
    }
    let bits = (1.0 / epsilon).log2().ceil().max(0.0) as u32;
    let n = (1 + bits).max(2);
    if n > MAX_N {
        return Err(Error::Domain(format!("tolerance {epsilon} needs n = {n} > {MAX_N}")));
    }
    Ok(n)
}

/// `k = 2^{n−1} + ⌊2^{n−1}·tan(θ/2) + ½⌋`, rounding half up.
pub fn choose_k(theta: f64, n: u32) -> Result<u64> {
    use std::f64::consts::FRAC_PI_2;
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::Domain(format!("n must lie in 2..={MAX_N}, got {n}")));
    }
    if !(theta > -FRAC_PI_2 && theta < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "angle {theta} outside (−π/2, π/2); compose larger rotations from S and Z first"
        )));
    }
    let h = half(n) as f64;
    let x = h * (theta / 2.0).tan();
    // x - floor(x) is exact here, so the half-up comparison is too.
    let fl = x.floor();
    let rounded = if x - fl >= 0.5 { fl + 1.0 } else { fl };
    let k = h + rounded;
    if k < 1.0 || k >= 2.0 * h {
        return Err(Error::Domain(format!(
            "angle {theta} rounds to k = {k} outside [1, 2^{n}) for n = {n}; decompose the rotation"
        )));
    }
    Ok(k as u64)
}

/// Halve even `k` together with `n`; the ratio `(k − 2^{n−1}) / 2^{n−1}` is
/// unchanged. Stops at `n = 1`.
pub fn reduce(mut k: u64, mut n: u32) -> (u64, u32) {
    while k.is_multiple_of(2) && n > 1 {
        k /= 2;
        n -= 1;
    }
    (k, n)
}

pub fn theta_star(k: u64, n: u32) -> f64 {
    let h = half(n) as f64;
    2.0 * ((k as f64 - h) / h).atan()
}

/// `P = (4^{n−1} + (k − 2^{n−1})²) / 2^{2n−1}`.
pub fn success_probability(k: u64, n: u32) -> f64 {
    let h = half(n) as f64;
    let m = k as f64 - h;
    (h * h + m * m) / (2.0 * h * h)
}
