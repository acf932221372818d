//! `P_δ(n) = P₀(n)·(1 − c_δ)^{n−1}` fitted per noise rate.

use std::collections::BTreeMap;

use log::warn;
use serde::{Deserialize, Serialize};

use super::experiment::Report;
use crate::error::{Error, Result};
use crate::planner::RotationPlan;

/// Small registers do not follow the exponential and are left out.
pub const MIN_FIT_N: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: u32,
    pub p: f64,
    /// Noiseless success probability at this `n`.
    pub p0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub delta: f64,
    pub c_delta: f64,
    /// Uncentered, as usual for a regression through the origin.
    pub r_squared: f64,
    pub predicted_c: f64,
    pub points: usize,
}

/// Chance that three independent flips of rate `δ` leave an odd number.
pub fn predicted_c(delta: f64) -> f64 {
    3.0 * delta * (1.0 - delta).powi(2) + delta.powi(3)
}

pub fn eval_exponential(p0: f64, c: f64, n: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("decay rate {c} outside [0, 1]")));
    }
    Ok(p0 * (1.0 - c).powi(n as i32 - 1))
}

/// Least squares of `ln(P/P₀)` against `n − 1` through the origin, over the
/// points with `n ≥ MIN_FIT_N`.
pub fn fit_exponential(delta: f64, points: &[FitPoint]) -> Result<FitResult> {
    let mut xy = Vec::new();
    for p in points.iter().filter(|p| p.n >= MIN_FIT_N) {
        if p.p <= 0.0 || p.p0 <= 0.0 {
            warn!("δ={delta}, n={}: dropping nonpositive probability {}", p.n, p.p);
            continue;
        }
        xy.push(((p.n - 1) as f64, (p.p / p.p0).ln()));
    }
    if xy.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "δ={delta}: {} usable points with n ≥ {MIN_FIT_N}, need 3",
            xy.len()
        )));
    }
    let sxx: f64 = xy.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = xy.iter().map(|(x, y)| x * y).sum();
    let syy: f64 = xy.iter().map(|(_, y)| y * y).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = xy.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(FitResult {
        delta,
        c_delta: (1.0 - slope.exp()).clamp(0.0, 1.0),
        r_squared,
        predicted_c: predicted_c(delta),
        points: xy.len(),
    })
}

/// One fit per distinct δ of a report, anchored to the closed-form `P₀`.
pub fn fit_report(report: &Report) -> Result<Vec<FitResult>> {
    let mut by_delta: BTreeMap<u64, (f64, Vec<FitPoint>)> = BTreeMap::new();
    for r in &report.rows {
        let p0 = RotationPlan::from_n(report.meta.theta, r.n, report.meta.reduce)?.p_success;
        by_delta.entry(r.delta.to_bits()).or_insert((r.delta, Vec::new())).1.push(FitPoint { n: r.n, p: r.prob, p0 });
    }
    let mut out: Vec<FitResult> =
        by_delta.into_values().map(|(d, pts)| fit_exponential(d, &pts)).collect::<Result<_>>()?;
    out.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_values() {
        for (d, c) in [(0.01, 0.02940), (0.05, 0.13550), (0.1, 0.24400)] {
            assert!((predicted_c(d) - c).abs() < 5e-6, "{d}: {}", predicted_c(d));
        }
        assert_eq!(predicted_c(0.0), 0.0);
    }

    #[test]
    fn evaluation() {
        assert!((eval_exponential(0.58572, 0.23788, 8).unwrap() - 0.0875).abs() < 5e-5);
        assert_eq!(eval_exponential(0.3, 0.0, 7).unwrap(), 0.3);
        assert_eq!(eval_exponential(0.625, 0.5, 2).unwrap(), 0.3125);
        assert!(eval_exponential(0.5, 1.5, 2).is_err());
    }

    #[test]
    fn too_few_points() {
        let pts = [FitPoint { n: 2, p: 0.5, p0: 0.6 }, FitPoint { n: 4, p: 0.5, p0: 0.6 }];
        assert!(matches!(fit_exponential(0.1, &pts), Err(Error::InsufficientData(_))));
        let pts = [
            FitPoint { n: 4, p: 0.5, p0: 0.6 },
            FitPoint { n: 5, p: 0.0, p0: 0.6 },
            FitPoint { n: 6, p: 0.4, p0: 0.6 },
        ];
        assert!(fit_exponential(0.1, &pts).is_err());
    }
}
