//! Adaptive Dormand–Prince 5(4) integration of complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-7, atol: 1e-9 }
    }
}

const MAX_STEPS: usize = 5_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

// Dormand–Prince tableau (autonomous systems only, so the nodes are not needed)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn rms_norm(v: &[Complex64], y0: &[Complex64], y1: &[Complex64], tol: Tolerances) -> f64 {
    let mut acc = 0.0;
    for ((e, a), b) in v.iter().zip(y0).zip(y1) {
        let sre = tol.atol + tol.rtol * a.re.abs().max(b.re.abs());
        let sim = tol.atol + tol.rtol * a.im.abs().max(b.im.abs());
        acc += (e.re / sre).powi(2) + (e.im / sim).powi(2);
    }
    (acc / (2 * v.len()) as f64).sqrt()
}

fn axpy(y: &[Complex64], h: f64, terms: &[(f64, &Vec<Complex64>)]) -> Vec<Complex64> {
    let mut out = y.to_vec();
    for &(a, k) in terms {
        if a == 0.0 {
            continue;
        }
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * (h * a);
        }
    }
    out
}

/// Initial step guess following Hairer, Nørsett & Wanner (II.4).
fn initial_step<F>(f: &F, y0: &[Complex64], f0: &[Complex64], tol: Tolerances) -> f64
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let zeros = vec![Complex64::new(0.0, 0.0); y0.len()];
    let d0 = rms_norm(y0, y0, &zeros, tol);
    let d1 = rms_norm(f0, y0, &zeros, tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<Complex64> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
    let f1 = f(&y1);
    let df: Vec<Complex64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_norm(&df, y0, &zeros, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates the autonomous system `y' = f(y)` from `t0`, returning the
/// state at each requested output time (ascending, all `>= t0`).
pub fn integrate<F>(f: F, y0: Vec<Complex64>, t0: f64, outputs: &[f64], tol: Tolerances) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut out = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut h = initial_step(&f, &y, &k1, tol);
    let mut steps = 0usize;

    for &t_out in outputs {
        while t_out - t > 1e-12 * t_out.abs().max(1.0) {
            if steps >= MAX_STEPS {
                return Err(Error::Solver(format!("exceeded {MAX_STEPS} steps at t = {t}")));
            }
            let remaining = t_out - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };

            let mut k: Vec<Vec<Complex64>> = Vec::with_capacity(7);
            k.push(k1.clone());
            for s in 1..7 {
                let terms: Vec<(f64, &Vec<Complex64>)> = (0..s).map(|j| (A[s][j], &k[j])).collect();
                let ys = axpy(&y, h_try, &terms);
                k.push(f(&ys));
            }
            let terms5: Vec<(f64, &Vec<Complex64>)> = (0..7).map(|j| (B5[j], &k[j])).collect();
            let y_new = axpy(&y, h_try, &terms5);
            let mut err = vec![Complex64::new(0.0, 0.0); y.len()];
            for (j, kj) in k.iter().enumerate() {
                if E[j] == 0.0 {
                    continue;
                }
                for (e, v) in err.iter_mut().zip(kj) {
                    *e += v * (h_try * E[j]);
                }
            }
            let err_norm = rms_norm(&err, &y, &y_new, tol);
            steps += 1;
            if !err_norm.is_finite() || y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                if h_try < 1e-14 {
                    return Err(Error::BlowUp { step: steps, time: t });
                }
                h = h_try * MIN_FACTOR;
                continue;
            }
            if err_norm <= 1.0 {
                t = if last { t_out } else { t + h_try };
                y = y_new;
                k1 = k.pop().expect("seven stages");
                let factor = if err_norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // a clipped final step says nothing about the step the controller wanted
                if !last || factor < 1.0 {
                    h = h_try * factor;
                }
            } else {
                h = h_try * (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::BlowUp { step: steps, time: t });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let lam = Complex64::new(-2.0, 3.0);
        let f = |y: &[Complex64]| y.iter().map(|v| v * lam).collect::<Vec<_>>();
        let outs = [0.5, 1.0, 2.0];
        let ys = integrate(f, vec![Complex64::new(1.0, 0.0)], 0.0, &outs, Tolerances::default()).unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            let exact = (lam * t).exp();
            assert!((y[0] - exact).norm() < 1e-7, "t={t}: {} vs {}", y[0], exact);
        }
    }

    #[test]
    fn nonlinear_logistic() {
        // y' = y (1 - y), y(0) = 0.1
        let f = |y: &[Complex64]| vec![y[0] * (Complex64::new(1.0, 0.0) - y[0])];
        let ys = integrate(f, vec![Complex64::new(0.1, 0.0)], 0.0, &[3.0], Tolerances::default()).unwrap();
        let exact = 1.0 / (1.0 + 9.0 * (-3.0f64).exp());
        assert!((ys[0][0].re - exact).abs() < 1e-7);
    }

    #[test]
    fn blow_up_reported() {
        // y' = y^2 from y(0)=1 blows up at t=1
        let f = |y: &[Complex64]| vec![y[0] * y[0]];
        let r = integrate(f, vec![Complex64::new(1.0, 0.0)], 0.0, &[2.0], Tolerances::default());
        assert!(r.is_err());
    }
}
