//! Fourier differentiation and trapezoid quadrature on periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// FFT-ordered angular wavenumbers `2*pi*n/L`, with the Nyquist bin stored
/// as `-nx/2`.
pub fn wavenumbers(nx: usize, length: f64) -> Result<Vec<f64>> {
    if nx == 0 || nx % 2 != 0 {
        return Err(Error::InvalidArgument(format!("nx must be even, got {nx}")));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidArgument(format!("domain length must be > 0, got {length}")));
    }
    let scale = 2.0 * PI / length;
    Ok((0..nx)
        .map(|j| {
            let n = if j < nx / 2 { j as f64 } else { j as f64 - nx as f64 };
            n * scale
        })
        .collect())
}

/// Cached FFT plans and wavenumbers for one periodic grid.
#[derive(Clone)]
pub struct SpectralWorkspace {
    nx: usize,
    length: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralWorkspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralWorkspace")
            .field("nx", &self.nx)
            .field("length", &self.length)
            .finish()
    }
}

impl SpectralWorkspace {
    pub fn new(nx: usize, length: f64) -> Result<Self> {
        let wavenumbers = wavenumbers(nx, length)?;
        let mut planner = FftPlanner::new();
        Ok(SpectralWorkspace {
            nx,
            length,
            wavenumbers,
            forward: planner.plan_fft_forward(nx),
            inverse: planner.plan_fft_inverse(nx),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Unnormalized forward DFT of a real row.
    pub fn forward(&self, row: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse DFT including the `1/nx` factor.
    pub fn inverse_complex(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.nx as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Real part of the inverse DFT.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inverse_complex(&mut spec);
        spec.into_iter().map(|c| c.re).collect()
    }

    /// Multiplier `(ik)^order` for every bin, with the Nyquist bin zeroed
    /// for odd orders.
    pub fn derivative_symbol(&self, order: u32) -> Vec<Complex64> {
        let nyq = self.nx / 2;
        self.wavenumbers
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if order % 2 == 1 && j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(order)
                }
            })
            .collect()
    }

    /// Spectral derivative of a real periodic row.
    pub fn derivative(&self, row: &[f64], order: u32) -> Result<Vec<f64>> {
        if row.len() != self.nx {
            return Err(Error::Shape {
                expected: self.nx.to_string(),
                got: row.len().to_string(),
            });
        }
        if !(1..=4).contains(&order) {
            return Err(Error::InvalidArgument(format!("derivative order must be 1..=4, got {order}")));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spectral derivative input"));
        }
        let mut spec = self.forward(row);
        for (s, m) in spec.iter_mut().zip(self.derivative_symbol(order)) {
            *s *= m;
        }
        Ok(self.inverse_real(spec))
    }

    /// All derivatives of orders `1..=max_order` of `row` from a single forward transform.
    pub fn derivatives_upto(&self, row: &[f64], max_order: u32) -> Vec<Vec<f64>> {
        let spec = self.forward(row);
        (1..=max_order)
            .map(|order| {
                let d: Vec<Complex64> = spec
                    .iter()
                    .zip(self.derivative_symbol(order))
                    .map(|(s, m)| s * m)
                    .collect();
                self.inverse_real(d)
            })
            .collect()
    }
}

/// Spectral derivative of one periodic row of length `row.len()` on a domain of length `length`.
pub fn spectral_derivative(row: &[f64], order: u32, length: f64) -> Result<Vec<f64>> {
    SpectralWorkspace::new(row.len(), length)?.derivative(row, order)
}

/// Trapezoid rule over a `time x space` block: half weights on the first
/// and last time rows, unit weights across space (periodic direction).
pub fn trapezoid_2d(values: ArrayView2<'_, f64>, dx: f64, dt: f64) -> f64 {
    let nt = values.nrows();
    if nt == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, row) in values.rows().into_iter().enumerate() {
        let w = if nt > 1 && (i == 0 || i == nt - 1) { 0.5 } else { 1.0 };
        total += w * row.sum();
    }
    total * dx * dt
}

/// Applies a spectral derivative to each row of a `time x space` array.
pub fn derivative_rows(ws: &SpectralWorkspace, values: &Array2<f64>, order: u32) -> Result<Array2<f64>> {
    let mut out = Array2::zeros(values.dim());
    for (i, row) in values.rows().into_iter().enumerate() {
        let d = ws.derivative(&row.to_vec(), order)?;
        out.row_mut(i).assign(&ndarray::Array1::from(d));
    }
    Ok(out)
}
