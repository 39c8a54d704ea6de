//! Spatial-translation test: does one constant-coefficient equation explain
//! two different stretches of the domain as well as separate fits do?
//!
//! Weak-form rows are built with the spatial bump centered on every grid
//! point (wrapping around the periodic domain) and on the Stage-3 time
//! centers. A region is a run of `nx/8` consecutive centers. For each region
//! start `a` and shift `s` the standard library is fit by least squares to
//! region `a`, region `a + s` and to both stacked together; the score is the
//! largest relative excess residual of the joint fit
//! `sqrt(max(0, R_joint - R_a - R_{a+s}) / (‖b_a‖² + ‖b_{a+s}‖²))`.
//! A second comparison fits the whole domain at once against eight separate
//! regions tiling it, `sqrt(max(0, R_all - Σ R_k) / ‖b‖²)`, which catches
//! coefficients that drift slowly enough for a pair of regions to hide it.
//! The score is the larger of the two. Every start offset is scanned, so a
//! circular shift of the data by a whole number of cells leaves the score
//! unchanged.

use nalgebra::{DMatrix, DVector};

use crate::domain::{LibraryTerm, Trajectory};
use crate::error::{Error, Result};
use crate::library::DerivativeFields;
use crate::linalg::{lstsq, normalize_columns};
use crate::weak::{bump, bump_derivative, make_test_grid, STAGE3_CENTERS};

pub const TRANSLATION_THRESHOLD: f64 = 0.05;

/// Shifts (in cells) compared by the test.
pub fn shifts(nx: usize) -> [usize; 3] {
    [nx / 8, nx / 4, ((nx as f64) / 3.0).round() as usize]
}

struct PeriodicRows {
    /// `theta[c][tau]` is the row for spatial center `c` and time center `tau`.
    theta: Vec<Vec<[f64; 10]>>,
    b: Vec<Vec<f64>>,
}

fn periodic_rows(traj: &Trajectory) -> Result<PeriodicRows> {
    let g = traj.grid();
    let fields = DerivativeFields::new(traj)?;
    let (n_t, _) = STAGE3_CENTERS;
    let tg = make_test_grid(g, n_t, 1)?;
    let reach = (tg.r_x / g.dx()).floor() as isize;
    let xw: Vec<(isize, f64)> = (-reach..=reach).map(|o| (o, bump(o as f64 * g.dx() / tg.r_x))).collect();
    let cols: Vec<ndarray::Array2<f64>> = LibraryTerm::STANDARD.iter().map(|&t| fields.term(t)).collect();
    let u = fields.derivative(0);
    let nx = g.nx as isize;
    let cell = g.dx() * g.dt();

    // time-integrate first, then convolve in space
    let time_weights = |t_c: f64, deriv: bool| -> Vec<f64> {
        let inside: Vec<usize> = (0..g.nt).filter(|&i| (g.t(i) - t_c).abs() <= tg.r_t).collect();
        let mut w = vec![0.0; g.nt];
        for (k, &i) in inside.iter().enumerate() {
            let half = if k == 0 || k + 1 == inside.len() { 0.5 } else { 1.0 };
            let s = (g.t(i) - t_c) / tg.r_t;
            w[i] = half * if deriv { bump_derivative(s) / tg.r_t } else { bump(s) };
        }
        w
    };
    let collapse = |f: &ndarray::Array2<f64>, w: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; g.nx];
        for (i, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                for (o, v) in out.iter_mut().zip(f.row(i)) {
                    *o += wi * v;
                }
            }
        }
        out
    };
    let convolve = |line: &[f64], c: usize| -> f64 {
        xw.iter()
            .map(|&(o, w)| w * line[((c as isize + o).rem_euclid(nx)) as usize])
            .sum::<f64>()
            * cell
    };

    let mut theta = vec![Vec::with_capacity(tg.t_centers.len()); g.nx];
    let mut b = vec![Vec::with_capacity(tg.t_centers.len()); g.nx];
    for &t_c in &tg.t_centers {
        let wt = time_weights(t_c, false);
        let wdt = time_weights(t_c, true);
        let lines: Vec<Vec<f64>> = cols.iter().map(|f| collapse(f, &wt)).collect();
        let uline = collapse(u, &wdt);
        for c in 0..g.nx {
            let mut row = [0.0; 10];
            for (j, line) in lines.iter().enumerate() {
                row[j] = convolve(line, c);
            }
            theta[c].push(row);
            b[c].push(-convolve(&uline, c));
        }
    }
    Ok(PeriodicRows { theta, b })
}

fn region(rows: &PeriodicRows, starts: &[usize], width: usize, nx: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut th = Vec::new();
    let mut bb = Vec::new();
    for &a in starts {
        for c in a..a + width {
            let c = c % nx;
            for (row, &bv) in rows.theta[c].iter().zip(&rows.b[c]) {
                th.push(*row);
                bb.push(bv);
            }
        }
    }
    (DMatrix::from_fn(th.len(), 10, |i, j| th[i][j]), DVector::from_vec(bb))
}

fn fit_residual(theta: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let (tn, _) = normalize_columns(theta);
    let (x, _) = lstsq(&tn, b);
    (b - tn * x).norm_squared()
}

/// Relative excess residual of the shared fit; see the module docs.
pub fn translation_score(traj: &Trajectory) -> Result<f64> {
    let nx = traj.grid().nx;
    if nx % 8 != 0 {
        return Err(Error::InvalidArgument(format!("translation test needs nx divisible by 8, got {nx}")));
    }
    let rows = periodic_rows(traj)?;
    let width = nx / 8;
    let single: Vec<(f64, f64)> = (0..nx)
        .map(|a| {
            let (t, b) = region(&rows, &[a], width, nx);
            (fit_residual(&t, &b), b.norm_squared())
        })
        .collect();
    let excess = |joint: f64, sep: f64, scale: f64| if scale > 0.0 { ((joint - sep).max(0.0) / scale).sqrt() } else { 0.0 };

    let mut score: f64 = 0.0;
    for a in 0..nx {
        for s in shifts(nx) {
            let a2 = (a + s) % nx;
            let (t, b) = region(&rows, &[a, a2], width, nx);
            let joint = fit_residual(&t, &b);
            score = score.max(excess(joint, single[a].0 + single[a2].0, single[a].1 + single[a2].1));
        }
    }
    let (t, b) = region(&rows, &[0], nx, nx);
    let whole = fit_residual(&t, &b);
    let total = b.norm_squared();
    for o in 0..width {
        let sep: f64 = (0..8).map(|k| single[o + k * width].0).sum();
        score = score.max(excess(whole, sep, total));
    }
    Ok(score)
}

pub fn detect_spatial_translation(traj: &Trajectory) -> Result<(bool, f64)> {
    let score = translation_score(traj)?;
    Ok((score < TRANSLATION_THRESHOLD, score))
}
