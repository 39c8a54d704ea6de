//! Fourier-space right-hand side `dc/dt = L c + N(c)` for PDEs written as
//! a linear combination of library terms.
//!
//! State vectors hold normalized Fourier coefficients `c_n = fft(u)_n / nx`,
//! so that `u_j = sum_n c_n exp(2 pi i n j / nx)`. The Nyquist coefficient
//! is kept at zero.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::domain::{LibraryTerm, MAX_DERIVATIVE};
use crate::error::Result;
use crate::spectral::wavenumbers;

pub struct SpectralRhs {
    nx: usize,
    /// Physical grid size used for products (`nx` or `2*nx` when dealiased).
    n_phys: usize,
    k: Vec<f64>,
    linear: Vec<Complex64>,
    nonlinear: Vec<(LibraryTerm, f64)>,
    max_order: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralRhs {
    pub fn new(nx: usize, length: f64, terms: &[(LibraryTerm, f64)], dealias: bool) -> Result<Self> {
        let k = wavenumbers(nx, length)?;
        let mut linear = vec![Complex64::new(0.0, 0.0); nx];
        let mut nonlinear = Vec::new();
        for &(term, c) in terms {
            if c == 0.0 {
                continue;
            }
            if term.power() == 1 {
                let d = term.derivative_order() as u32;
                for (l, &kn) in linear.iter_mut().zip(&k) {
                    *l += c * Complex64::new(0.0, kn).powu(d);
                }
            } else {
                nonlinear.push((term, c));
            }
        }
        linear[nx / 2] = Complex64::new(0.0, 0.0);
        let max_order = nonlinear.iter().map(|(t, _)| t.derivative_order()).max().unwrap_or(0);
        // padding by two removes aliasing from quadratic and cubic products
        let n_phys = if dealias { 2 * nx } else { nx };
        let mut planner = FftPlanner::new();
        Ok(SpectralRhs {
            nx,
            n_phys,
            k,
            linear,
            nonlinear,
            max_order,
            forward: planner.plan_fft_forward(n_phys),
            inverse: planner.plan_fft_inverse(n_phys),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn linear(&self) -> &[Complex64] {
        &self.linear
    }

    pub fn has_nonlinear(&self) -> bool {
        !self.nonlinear.is_empty()
    }

    /// Index of mode `n` (with `-nx/2 < n < nx/2`) in a length-`len` FFT buffer.
    fn slot(n: isize, len: usize) -> usize {
        if n >= 0 {
            n as usize
        } else {
            (len as isize + n) as usize
        }
    }

    fn mode(&self, j: usize) -> isize {
        if j < self.nx / 2 {
            j as isize
        } else {
            j as isize - self.nx as isize
        }
    }

    /// Physical-space samples of `d^order u / dx^order` on the product grid.
    fn physical(&self, c: &[Complex64], order: usize) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_phys];
        for j in 0..self.nx {
            if j == self.nx / 2 {
                continue;
            }
            let m = Complex64::new(0.0, self.k[j]).powu(order as u32);
            buf[Self::slot(self.mode(j), self.n_phys)] = c[j] * m;
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Nonlinear contribution in normalized Fourier coefficients.
    pub fn nonlinear(&self, c: &[Complex64]) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        if self.nonlinear.is_empty() {
            return vec![zero; self.nx];
        }
        let fields: Vec<Vec<f64>> = (0..=self.max_order.min(MAX_DERIVATIVE))
            .map(|d| self.physical(c, d))
            .collect();
        let mut prod = vec![zero; self.n_phys];
        for (term, coef) in &self.nonlinear {
            let e = term.exponents();
            for (p, out) in prod.iter_mut().enumerate() {
                let mut v = *coef;
                for (d, &pow) in e.iter().enumerate() {
                    if pow > 0 {
                        v *= fields[d][p].powi(pow as i32);
                    }
                }
                out.re += v;
            }
        }
        self.forward.process(&mut prod);
        let scale = 1.0 / self.n_phys as f64;
        let mut out = vec![zero; self.nx];
        for (j, o) in out.iter_mut().enumerate() {
            if j == self.nx / 2 {
                continue;
            }
            *o = prod[Self::slot(self.mode(j), self.n_phys)] * scale;
        }
        out
    }

    /// Full right-hand side `L c + N(c)`.
    pub fn eval(&self, c: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.nonlinear(c);
        for ((o, l), ci) in out.iter_mut().zip(&self.linear).zip(c) {
            *o += l * ci;
        }
        out
    }
}
