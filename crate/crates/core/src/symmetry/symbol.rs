//! Per-wavenumber growth-rate estimate `σ̂(k) = Σ conj(û) û_t / Σ |û|²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::domain::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::SpectralWorkspace;

/// Modes with `|k|` at or below this are never reliable.
pub const MIN_WAVENUMBER: f64 = 0.5;
/// Reliable modes carry more than this fraction of the peak power.
pub const RELIABLE_POWER_FRAC: f64 = 0.01;
/// Time samples skipped at each end of a window.
const EDGE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolEstimate {
    /// Wavenumbers of bins `1..nx/2`.
    pub k: Vec<f64>,
    pub sigma: Vec<Complex64>,
    /// Mean `|û|²` over the interior time samples.
    pub power: Vec<f64>,
    pub reliable: Vec<bool>,
}

impl SymbolEstimate {
    pub fn reliable_indices(&self) -> Vec<usize> {
        (0..self.k.len()).filter(|&i| self.reliable[i]).collect()
    }

    pub fn max_power(&self) -> f64 {
        self.power.iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// Symbol estimate from the whole trajectory.
pub fn estimate_symbol(traj: &Trajectory) -> Result<SymbolEstimate> {
    estimate_symbol_window(traj, 0, traj.grid().nt)
}

/// Symbol estimate from time samples `start..end`, differencing with
/// centered differences and skipping two samples at either end.
pub fn estimate_symbol_window(traj: &Trajectory, start: usize, end: usize) -> Result<SymbolEstimate> {
    let g = traj.grid();
    if end > g.nt || end < start + 2 * EDGE + 2 {
        return Err(Error::InvalidArgument(format!(
            "symbol window {start}..{end} needs at least {} samples",
            2 * EDGE + 2
        )));
    }
    let ws = SpectralWorkspace::new(g.nx, g.length)?;
    let spectra: Vec<Vec<Complex64>> = (start..end)
        .map(|i| ws.forward(traj.values().row(i).as_slice().expect("row-major trajectory")))
        .collect();
    let half = g.nx / 2;
    let dt = g.dt();
    let mut num = vec![Complex64::new(0.0, 0.0); half - 1];
    let mut den = vec![0.0; half - 1];
    let interior = EDGE..spectra.len() - EDGE;
    let count = interior.len() as f64;
    for i in interior {
        for n in 1..half {
            let u = spectra[i][n];
            let ut = (spectra[i + 1][n] - spectra[i - 1][n]) / (2.0 * dt);
            num[n - 1] += u.conj() * ut;
            den[n - 1] += u.norm_sqr();
        }
    }
    let k: Vec<f64> = (1..half).map(|n| ws.wavenumbers()[n]).collect();
    let power: Vec<f64> = den.iter().map(|d| d / count).collect();
    let pmax = power.iter().fold(0.0f64, |a, &b| a.max(b));
    let sigma: Vec<Complex64> = num
        .iter()
        .zip(&den)
        .map(|(n, &d)| if d > 0.0 { n / d } else { Complex64::new(0.0, 0.0) })
        .collect();
    let reliable: Vec<bool> = k
        .iter()
        .zip(&power)
        .map(|(&kk, &p)| kk.abs() > MIN_WAVENUMBER && pmax > 0.0 && p > RELIABLE_POWER_FRAC * pmax)
        .collect();
    if !reliable.iter().any(|&r| r) {
        return Err(Error::NoReliableModes);
    }
    Ok(SymbolEstimate { k, sigma, power, reliable })
}
