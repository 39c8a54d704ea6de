//! Fixed-step ETDRK4 for stiff diagonal-linear spectral systems
//! (Cox–Matthews scheme with contour-integral phi coefficients).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Points on the contour used to evaluate the phi functions.
pub const CONTOUR_POINTS: usize = 32;

/// Per-mode ETDRK4 coefficients for step `h` and linear symbol `L`.
pub struct EtdCoefficients {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl EtdCoefficients {
    pub fn new(linear: &[Complex64], h: f64) -> Self {
        let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let m = CONTOUR_POINTS as f64;
        let mut c = EtdCoefficients {
            e: Vec::with_capacity(linear.len()),
            e2: Vec::with_capacity(linear.len()),
            q: Vec::with_capacity(linear.len()),
            f1: Vec::with_capacity(linear.len()),
            f2: Vec::with_capacity(linear.len()),
            f3: Vec::with_capacity(linear.len()),
        };
        for &l in linear {
            let hl = l * h;
            c.e.push(hl.exp());
            c.e2.push((hl / 2.0).exp());
            let (mut q, mut f1, mut f2, mut f3) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for r in &roots {
                let z = hl + r;
                let ez = z.exp();
                let z3 = z * z * z;
                q += ((z / 2.0).exp() - 1.0) / z;
                f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            c.q.push(q * (h / m));
            c.f1.push(f1 * (h / m));
            c.f2.push(f2 * (h / m));
            c.f3.push(f3 * (h / m));
        }
        c
    }

    /// One ETDRK4 step of `v' = L v + N(v)`.
    pub fn step<N>(&self, v: &[Complex64], nonlinear: &N) -> Vec<Complex64>
    where
        N: Fn(&[Complex64]) -> Vec<Complex64>,
    {
        let nv = nonlinear(v);
        let a: Vec<Complex64> = (0..v.len()).map(|i| self.e2[i] * v[i] + self.q[i] * nv[i]).collect();
        let na = nonlinear(&a);
        let b: Vec<Complex64> = (0..v.len()).map(|i| self.e2[i] * v[i] + self.q[i] * na[i]).collect();
        let nb = nonlinear(&b);
        let c: Vec<Complex64> = (0..v.len())
            .map(|i| self.e2[i] * a[i] + self.q[i] * (2.0 * nb[i] - nv[i]))
            .collect();
        let nc = nonlinear(&c);
        (0..v.len())
            .map(|i| {
                self.e[i] * v[i] + nv[i] * self.f1[i] + 2.0 * (na[i] + nb[i]) * self.f2[i] + nc[i] * self.f3[i]
            })
            .collect()
    }
}

/// Advances `v` by `steps` fixed steps of size `h`. `step_offset` only
/// labels blow-up errors.
pub fn advance<N>(
    coeffs: &EtdCoefficients,
    mut v: Vec<Complex64>,
    steps: usize,
    h: f64,
    t0: f64,
    step_offset: usize,
    nonlinear: &N,
) -> Result<Vec<Complex64>>
where
    N: Fn(&[Complex64]) -> Vec<Complex64>,
{
    for s in 0..steps {
        v = coeffs.step(&v, nonlinear);
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::BlowUp {
                step: step_offset + s + 1,
                time: t0 + (s + 1) as f64 * h,
            });
        }
    }
    Ok(v)
}
