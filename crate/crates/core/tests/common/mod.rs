//! Refined-quadrature oracle for weak-form rows and the discrete Galilean boost.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use eqod_core::library::{galilean_reduced, DerivativeFields, LibrarySpec};
use eqod_core::weak::{bump, bump_derivative, make_test_grid, WeakAssembler, STAGE3_CENTERS};
use eqod_core::{Grid1D, Trajectory, TrajectorySet};

const REFINE: usize = 4;
const STENCIL: [isize; 6] = [-2, -1, 0, 1, 2, 3];

/// Six-point Lagrange weights at fractional offset `s` in [0, 1).
fn lagrange(s: f64) -> [f64; 6] {
    let mut w = [1.0; 6];
    for (a, wa) in w.iter_mut().enumerate() {
        for (b, &nb) in STENCIL.iter().enumerate() {
            if a != b {
                *wa *= (s - nb as f64) / (STENCIL[a] - nb) as f64;
            }
        }
    }
    w
}

/// Each time slice refined `REFINE`× in x by zero-padding its spectrum.
pub fn refine_x(f: &Array2<f64>) -> Array2<f64> {
    let (nt, nx) = f.dim();
    let big = REFINE * nx;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nx);
    let inv = planner.plan_fft_inverse(big);
    let mut out = Array2::zeros((nt, big));
    for i in 0..nt {
        let mut row: Vec<Complex64> = f.row(i).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut row);
        let mut pad = vec![Complex64::new(0.0, 0.0); big];
        for k in 0..nx / 2 {
            pad[k] = row[k];
            if k > 0 {
                pad[big - k] = row[nx - k];
            }
        }
        pad[nx / 2] = row[nx / 2] * 0.5;
        pad[big - nx / 2] = row[nx / 2] * 0.5;
        inv.process(&mut pad);
        for (o, v) in out.row_mut(i).iter_mut().zip(&pad) {
            *o = v.re / nx as f64;
        }
    }
    out
}

/// Lagrange interpolation in t on a field already refined in x.
fn interpolate_t(f: &Array2<f64>, g: &Grid1D, t: f64, jj: usize) -> f64 {
    let nt = f.nrows();
    let ft = (t - g.t_start) / g.dt();
    let i = ft.floor() as isize;
    let w = lagrange(ft - i as f64);
    STENCIL
        .iter()
        .zip(&w)
        .map(|(&d, w)| w * f[[(i + d).clamp(0, nt as isize - 1) as usize, jj]])
        .sum()
}

/// Row integrals on a 4× refined lattice: spectral refinement in x,
/// six-point Lagrange in t.
pub fn oracle_row(tr: &Trajectory, spec: &LibrarySpec, tc: f64, xc: f64, rt: f64, rx: f64) -> (Vec<f64>, f64) {
    let g = *tr.grid();
    let fields = DerivativeFields::new(tr).unwrap();
    let cols: Vec<Array2<f64>> = spec.terms().iter().map(|&t| refine_x(&fields.term(t))).collect();
    let u = refine_x(tr.values());
    let nx_fine = (REFINE * g.nx) as i64;
    let (ht, hx) = (g.dt() / REFINE as f64, g.dx() / REFINE as f64);
    let i0 = ((tc - rt - g.t_start) / ht).ceil() as i64;
    let i1 = ((tc + rt - g.t_start) / ht).floor() as i64;
    let j0 = ((xc - rx - g.x0) / hx).ceil() as i64;
    let j1 = ((xc + rx - g.x0) / hx).floor() as i64;
    let mut theta = vec![0.0; cols.len()];
    let mut b = 0.0;
    for i in i0..=i1 {
        let t = g.t_start + i as f64 * ht;
        let st = (t - tc) / rt;
        for j in j0..=j1 {
            let x = g.x0 + j as f64 * hx;
            let sx = (x - xc) / rx;
            let phi = bump(st) * bump(sx);
            let phi_t = bump_derivative(st) / rt * bump(sx);
            let jj = j.rem_euclid(nx_fine) as usize;
            b -= interpolate_t(&u, &g, t, jj) * phi_t;
            for (acc, c) in theta.iter_mut().zip(&cols) {
                *acc += interpolate_t(c, &g, t, jj) * phi;
            }
        }
    }
    let w = ht * hx;
    (theta.into_iter().map(|v| v * w).collect(), b * w)
}

/// Largest deviation between assembled Stage-3 rows (standard library) and
/// the oracle, relative to the largest entry of each column and of b.
pub fn oracle_max_error(set: &TrajectorySet) -> f64 {
    let asm = WeakAssembler::new(set).unwrap();
    let (nt, nx) = STAGE3_CENTERS;
    let tg = make_test_grid(asm.grid(), nt, nx).unwrap();
    let spec = LibrarySpec::standard();
    let sys = asm.assemble(&spec, &tg).unwrap();
    let col_scale: Vec<f64> = (0..spec.len()).map(|j| sys.theta().column(j).amax()).collect();
    let b_scale = sys.b().amax();
    let mut worst: f64 = 0.0;
    for (r, meta) in sys.row_meta().iter().enumerate() {
        let tr = &set.trajectories()[meta.trajectory];
        let (theta, b) = oracle_row(tr, &spec, meta.t_c, meta.x_c, tg.r_t, tg.r_x);
        worst = worst.max((sys.b()[r] - b).abs() / b_scale);
        for (j, &o) in theta.iter().enumerate() {
            worst = worst.max((sys.theta()[(r, j)] - o).abs() / col_scale[j]);
        }
    }
    worst
}

fn lstsq(theta: &DMatrix<f64>, b: &DVector<f64>) -> Vec<f64> {
    theta.clone().svd(true, true).solve(b, 1e-12).unwrap().iter().copied().collect()
}

/// Least-squares coefficients on the Galilean library for the first
/// trajectory and for its boost `u(x - ct, t) + c`, the shift rounded to
/// whole cells per time slice.
pub fn boost_fits(set: &TrajectorySet, c: f64) -> (Vec<f64>, Vec<f64>) {
    let tr = &set.trajectories()[0];
    let g = *tr.grid();
    let u = tr.values();
    let mut boosted = Array2::zeros(u.dim());
    for i in 0..g.nt {
        let shift = (c * g.t(i) / g.dx()).round() as usize;
        for j in 0..g.nx {
            boosted[[i, (j + shift) % g.nx]] = u[[i, j]] + c;
        }
    }
    let lib = galilean_reduced();
    let tg = make_test_grid(&g, 5, 7).unwrap();
    let fit = |s: &TrajectorySet| {
        let sys = WeakAssembler::new(s).unwrap().assemble(&lib, &tg).unwrap();
        lstsq(sys.theta(), sys.b())
    };
    let one = TrajectorySet::new(vec![tr.clone()]).unwrap();
    let moved = TrajectorySet::new(vec![Trajectory::new(g, boosted).unwrap()]).unwrap();
    (fit(&one), fit(&moved))
}
