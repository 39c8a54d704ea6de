//! Cyclic coordinate descent for `‖b - Θξ‖² + λ‖ξ‖₁`.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub xi: Vec<f64>,
    pub sweeps: usize,
    /// False when `max_sweeps` was reached before the update tolerance.
    pub converged: bool,
}

fn soft(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Objective value `‖b - Θξ‖² + λ‖ξ‖₁`.
pub fn objective(theta: &DMatrix<f64>, b: &DVector<f64>, xi: &[f64], lambda: f64) -> f64 {
    let x = DVector::from_column_slice(xi);
    (b - theta * x).norm_squared() + lambda * xi.iter().map(|v| v.abs()).sum::<f64>()
}

/// Coordinate descent from a zero start. Converged when the largest
/// coefficient change in a sweep drops below `tol`.
pub fn lasso(theta: &DMatrix<f64>, b: &DVector<f64>, lambda: f64, tol: f64, max_sweeps: usize) -> LassoFit {
    lasso_from(theta, b, lambda, tol, max_sweeps, vec![0.0; theta.ncols()])
}

/// Coordinate descent from `start`.
pub fn lasso_from(
    theta: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_sweeps: usize,
    start: Vec<f64>,
) -> LassoFit {
    let p = theta.ncols();
    let mut xi = start;
    let sq: Vec<f64> = theta.column_iter().map(|c| c.norm_squared()).collect();
    let mut r = b - theta * DVector::from_column_slice(&xi);
    let half = 0.5 * lambda;
    for sweep in 1..=max_sweeps {
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            if sq[j] == 0.0 {
                xi[j] = 0.0;
                continue;
            }
            let col = theta.column(j);
            let old = xi[j];
            let rho = col.dot(&r) + sq[j] * old;
            let new = soft(rho, half) / sq[j];
            let delta = new - old;
            if delta != 0.0 {
                r.axpy(-delta, &col, 1.0);
                xi[j] = new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        if max_delta < tol {
            return LassoFit { xi, sweeps: sweep, converged: true };
        }
    }
    LassoFit { xi, sweeps: max_sweeps, converged: false }
}
