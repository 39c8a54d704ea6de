//! Scaling test: is `|Re σ̂(k)|` a power law in `|k|`?

use serde::Serialize;

use crate::domain::Trajectory;
use crate::error::Result;

use super::symbol::{estimate_symbol, MIN_WAVENUMBER};

pub const SCALING_R2_THRESHOLD: f64 = 0.9;
/// Modes used in the fit carry more than this fraction of the peak power.
pub const SCALING_POWER_FRAC: f64 = 0.05;
const MIN_RATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingOutcome {
    pub detected: bool,
    pub r_squared: f64,
    pub slope: f64,
    pub modes: usize,
}

/// Weighted least squares of `y` on `x` with weights `w`; returns `(slope, R²)`.
fn weighted_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx).powi(2);
        sxy += wi * (xi - mx) * (yi - my);
        syy += wi * (yi - my).powi(2);
    }
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

pub fn detect_scaling(traj: &Trajectory) -> Result<ScalingOutcome> {
    let s = estimate_symbol(traj)?;
    let pmax = s.max_power();
    let idx: Vec<usize> = (0..s.k.len())
        .filter(|&i| s.k[i].abs() > MIN_WAVENUMBER && s.power[i] > SCALING_POWER_FRAC * pmax && s.sigma[i].re.abs() > MIN_RATE)
        .collect();
    if idx.len() < 3 {
        return Ok(ScalingOutcome {
            detected: false,
            r_squared: 0.0,
            slope: 0.0,
            modes: idx.len(),
        });
    }
    let x: Vec<f64> = idx.iter().map(|&i| s.k[i].abs().ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&i| s.sigma[i].re.abs().ln()).collect();
    let w: Vec<f64> = idx.iter().map(|&i| s.power[i]).collect();
    let (slope, r2) = weighted_fit(&x, &y, &w);
    Ok(ScalingOutcome {
        detected: r2 > SCALING_R2_THRESHOLD,
        r_squared: r2,
        slope,
        modes: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_has_too_few_modes() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64, 0.0, 1.0, 64).unwrap();
        let tr = Trajectory::from_fn(g, |x, t| (3.0 * x).sin() * (-0.9 * t).exp()).unwrap();
        let o = detect_scaling(&tr).unwrap();
        assert!(!o.detected);
        assert_eq!(o.r_squared, 0.0);
    }

    #[test]
    fn exact_power_law() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64, 0.0, 1.0, 200).unwrap();
        let tr = Trajectory::from_fn(g, |x, t| {
            (1..=6).map(|k| (k as f64 * x).cos() * (-0.01 * (k * k * k) as f64 * t).exp()).sum::<f64>()
        })
        .unwrap();
        let o = detect_scaling(&tr).unwrap();
        assert!(o.detected, "{o:?}");
        assert!((o.slope - 3.0).abs() < 0.05, "{o:?}");
    }
}
