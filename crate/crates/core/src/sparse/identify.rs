//! Stage-3 identification: cross-validated LASSO, rescaling to physical
//! units, then repeated thresholding with least-squares debiasing.

use serde::Serialize;

use super::cv::{lasso_cv, LassoConfig};
use crate::domain::{CoefficientVector, TrajectorySet};
use crate::error::{Error, Result};
use crate::library::LibrarySpec;
use crate::linalg::{lstsq, select_columns};
use crate::weak::{assemble, TestGrid, WeakSystem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentifyConfig {
    pub threshold_floor: f64,
    pub threshold_frac: f64,
    pub debias_rounds: usize,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        IdentifyConfig {
            threshold_floor: 1e-3,
            threshold_frac: 0.03,
            debias_rounds: 2,
        }
    }
}

impl IdentifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_floor > 0.0 && self.threshold_frac > 0.0 && self.debias_rounds > 0) {
            return Err(Error::InvalidArgument("identify thresholds and rounds must be positive".into()));
        }
        Ok(())
    }

    /// `max(floor, frac * max|ξ|)`.
    pub fn threshold(&self, xi: &[f64]) -> f64 {
        let m = xi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        self.threshold_floor.max(self.threshold_frac * m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage3Fit {
    /// Physical coefficients over the system's library.
    pub coeffs: CoefficientVector,
    pub lambda_star: f64,
    /// LASSO coefficients rescaled to physical units, before thresholding.
    pub lasso_coeffs: Vec<f64>,
    pub cv_converged: bool,
}

/// Thresholds and refits by least squares, `config.debias_rounds` times.
pub fn threshold_and_debias(sys: &WeakSystem, xi: &[f64], config: &IdentifyConfig) -> Vec<f64> {
    let mut xi = xi.to_vec();
    for _ in 0..config.debias_rounds {
        let eta = config.threshold(&xi);
        let keep: Vec<usize> = (0..xi.len()).filter(|&j| xi[j].abs() >= eta).collect();
        let mut next = vec![0.0; xi.len()];
        if !keep.is_empty() {
            let (sol, _) = lstsq(&select_columns(sys.theta(), &keep), sys.b());
            for (k, &j) in keep.iter().enumerate() {
                next[j] = sol[k];
            }
        }
        xi = next;
    }
    xi
}

/// Stage 3 on an already assembled system.
pub fn identify_system(sys: &WeakSystem, lasso_cfg: &LassoConfig, config: &IdentifyConfig, seed: u64) -> Result<Stage3Fit> {
    config.validate()?;
    let cv = lasso_cv(sys.theta(), sys.b(), lasso_cfg, seed)?;
    let physical: Vec<f64> = cv
        .xi_norm
        .iter()
        .zip(&cv.column_norms)
        .map(|(&x, &n)| if n > 0.0 { x / n * cv.b_norm } else { 0.0 })
        .collect();
    let xi = threshold_and_debias(sys, &physical, config);
    Ok(Stage3Fit {
        coeffs: CoefficientVector::from_values(sys.spec().terms(), &xi)?,
        lambda_star: cv.lambda_star,
        lasso_coeffs: physical,
        cv_converged: cv.converged,
    })
}

/// Assembles the weak system over `spec` on `tg` and runs Stage 3.
pub fn wf_lasso_identify(set: &TrajectorySet, spec: &LibrarySpec, seed: u64, tg: &TestGrid) -> Result<CoefficientVector> {
    let sys = assemble(set, spec, tg)?;
    Ok(identify_system(&sys, &LassoConfig::default(), &IdentifyConfig::default(), seed)?.coeffs)
}

/// Ordinary least squares of `b` on the full system.
pub fn ols(sys: &WeakSystem) -> Vec<f64> {
    let (x, _) = lstsq(sys.theta(), sys.b());
    x.iter().copied().collect()
}
