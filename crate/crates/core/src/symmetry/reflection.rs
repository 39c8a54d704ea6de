//! Parity tests under the spatial flip `j -> (nx - j) mod nx`.

use serde::Serialize;

use crate::domain::Trajectory;
use crate::error::{Error, Result};

pub const REFLECTION_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectionOutcome {
    pub even: bool,
    pub odd: bool,
    /// `‖U - U_flip‖² / ‖U‖²`.
    pub even_score: f64,
    /// `‖U + U_flip‖² / ‖U‖²`.
    pub odd_score: f64,
}

pub fn detect_reflection(traj: &Trajectory) -> Result<ReflectionOutcome> {
    let u = traj.values();
    let nx = traj.grid().nx;
    let norm: f64 = u.iter().map(|v| v * v).sum();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let mut minus = 0.0;
    let mut plus = 0.0;
    for row in u.rows() {
        for j in 0..nx {
            let f = row[(nx - j) % nx];
            minus += (row[j] - f).powi(2);
            plus += (row[j] + f).powi(2);
        }
    }
    let (even_score, odd_score) = (minus / norm, plus / norm);
    Ok(ReflectionOutcome {
        even: even_score < REFLECTION_THRESHOLD,
        odd: odd_score < REFLECTION_THRESHOLD,
        even_score,
        odd_score,
    })
}
