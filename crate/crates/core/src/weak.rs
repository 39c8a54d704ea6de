//! Weak-form linear systems from bump test functions.
//!
//! Each test function is a separable product of bumps in `t` and `x`. The
//! response is `b = -∬ u φ_t` and column `j` is `∬ θ_j(u) φ`, both by the
//! trapezoid rule on the support rectangle of `φ`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{Grid1D, TrajectorySet};
use crate::error::{Error, Result};
use crate::library::{DerivativeFields, LibrarySpec};
use crate::linalg::select_columns;
use crate::spectral::SpectralWorkspace;

/// Stage-3 test grid size (time, space).
pub const STAGE3_CENTERS: (usize, usize) = (5, 7);
/// Denser grid used for stability selection (time, space).
pub const STABILITY_CENTERS: (usize, usize) = (8, 10);

const MARGIN: f64 = 1.05;
const RADIUS_FRAC_T: f64 = 0.18;
const RADIUS_FRAC_X: f64 = 0.20;
const MIN_RADIUS_CELLS: f64 = 8.0;

/// `exp(-1/(1-r^2))` on `|r| < 1`, zero elsewhere.
pub fn bump(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Derivative of [`bump`] with respect to `r`.
pub fn bump_derivative(r: f64) -> f64 {
    if r.abs() < 1.0 {
        let q = 1.0 - r * r;
        -2.0 * r / (q * q) * bump(r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestGrid {
    pub t_centers: Vec<f64>,
    pub x_centers: Vec<f64>,
    pub r_t: f64,
    pub r_x: f64,
}

impl TestGrid {
    pub fn len(&self) -> usize {
        self.t_centers.len() * self.x_centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Smallest `nt` and `nx` for which the margin interval is nonempty when the
/// radius floor of eight cells is active.
fn minimum_sizes() -> (usize, usize) {
    // 2 * 1.05 * 8 cells must fit in (n - 1) cells
    let cells = (2.0 * MARGIN * MIN_RADIUS_CELLS).ceil() as usize;
    (cells + 1, cells + 1)
}

/// Radii from the data extent and equally spaced centers (inclusive) over
/// the margin-shrunk interval.
pub fn make_test_grid(grid: &Grid1D, n_t: usize, n_x: usize) -> Result<TestGrid> {
    if n_t == 0 || n_x == 0 {
        return Err(Error::InvalidArgument("test grid needs at least one center per axis".into()));
    }
    let t_range = grid.t_end - grid.t_start;
    let x_range = grid.length;
    let r_t = (RADIUS_FRAC_T * t_range).max(MIN_RADIUS_CELLS * grid.dt());
    let r_x = (RADIUS_FRAC_X * x_range).max(MIN_RADIUS_CELLS * grid.dx());
    let (t_lo, t_hi) = (grid.t_start + MARGIN * r_t, grid.t_end - MARGIN * r_t);
    let x_max = grid.x(grid.nx - 1);
    let (x_lo, x_hi) = (grid.x0 + MARGIN * r_x, x_max - MARGIN * r_x);
    if t_lo > t_hi || x_lo > x_hi {
        let (min_nt, min_nx) = minimum_sizes();
        return Err(Error::TestGridTooSmall { min_nt, min_nx });
    }
    Ok(TestGrid {
        t_centers: linspace(t_lo, t_hi, n_t),
        x_centers: linspace(x_lo, x_hi, n_x),
        r_t,
        r_x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowMeta {
    pub trajectory: usize,
    pub t_c: f64,
    pub x_c: f64,
}

#[derive(Debug, Clone)]
pub struct WeakSystem {
    theta: DMatrix<f64>,
    b: DVector<f64>,
    spec: LibrarySpec,
    row_meta: Vec<RowMeta>,
}

impl WeakSystem {
    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn spec(&self) -> &LibrarySpec {
        &self.spec
    }

    pub fn row_meta(&self) -> &[RowMeta] {
        &self.row_meta
    }

    pub fn nrows(&self) -> usize {
        self.theta.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.theta.ncols()
    }

    /// The same rows restricted to the columns of `sub`, which must be a
    /// subset of this system's library.
    pub fn restrict(&self, sub: &LibrarySpec) -> Result<WeakSystem> {
        let idx = sub
            .terms()
            .iter()
            .map(|&t| {
                self.spec
                    .position(t)
                    .ok_or_else(|| Error::InvalidArgument(format!("term {t} not in the assembled library")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeakSystem {
            theta: select_columns(&self.theta, &idx),
            b: self.b.clone(),
            spec: sub.clone(),
            row_meta: self.row_meta.clone(),
        })
    }

    /// Squared residual `‖b - Θ ξ‖²`.
    pub fn residual_sq(&self, xi: &[f64]) -> f64 {
        let xi = DVector::from_column_slice(xi);
        (&self.b - &self.theta * xi).norm_squared()
    }

    /// CSV dump: `trajectory,t_c,x_c,<terms...>,b`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "trajectory,t_c,x_c")?;
        for tag in self.spec.tags() {
            write!(w, ",{tag}")?;
        }
        writeln!(w, ",b")?;
        for (i, m) in self.row_meta.iter().enumerate() {
            write!(w, "{},{},{}", m.trajectory, m.t_c, m.x_c)?;
            for j in 0..self.ncols() {
                write!(w, ",{}", self.theta[(i, j)])?;
            }
            writeln!(w, ",{}", self.b[i])?;
        }
        Ok(())
    }
}

/// Derivative fields of every trajectory, computed once and reused across
/// assemblies with different libraries or test grids.
#[derive(Debug, Clone)]
pub struct WeakAssembler {
    grid: Grid1D,
    values: Vec<DerivativeFields>,
}

struct Window {
    lo: usize,
    weights: Vec<f64>,
}

/// Trapezoid-weighted samples of `profile((s - c)/r)` over the grid points
/// inside `[c - r, c + r]`, with half weights on the two end samples.
fn window(points: impl Fn(usize) -> f64, n: usize, c: f64, r: f64, profile: impl Fn(f64) -> f64, halve_ends: bool) -> Window {
    let inside: Vec<usize> = (0..n).filter(|&i| (points(i) - c).abs() <= r).collect();
    let lo = inside.first().copied().unwrap_or(0);
    let len = inside.len();
    let weights = inside
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let w = if halve_ends && len > 1 && (k == 0 || k == len - 1) { 0.5 } else { 1.0 };
            w * profile((points(i) - c) / r)
        })
        .collect();
    Window { lo, weights }
}

impl WeakAssembler {
    pub fn new(set: &TrajectorySet) -> Result<Self> {
        let grid = *set.grid();
        let ws = SpectralWorkspace::new(grid.nx, grid.length)?;
        let values = set
            .trajectories()
            .par_iter()
            .map(|tr| DerivativeFields::with_workspace(tr, &ws))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeakAssembler { grid, values })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn fields(&self) -> &[DerivativeFields] {
        &self.values
    }

    pub fn assemble(&self, spec: &LibrarySpec, tg: &TestGrid) -> Result<WeakSystem> {
        let g = &self.grid;
        if tg.r_t < 2.0 * g.dt() || tg.r_x < 2.0 * g.dx() {
            return Err(Error::DegenerateSupport(format!(
                "radii (r_t = {}, r_x = {}) must span at least two cells (dt = {}, dx = {})",
                tg.r_t,
                tg.r_x,
                g.dt(),
                g.dx()
            )));
        }
        let cell = g.dt() * g.dx();
        let mut centers = Vec::with_capacity(self.values.len() * tg.len());
        for m in 0..self.values.len() {
            for &t_c in &tg.t_centers {
                for &x_c in &tg.x_centers {
                    centers.push(RowMeta { trajectory: m, t_c, x_c });
                }
            }
        }
        let columns: Vec<Vec<ndarray::Array2<f64>>> = self
            .values
            .par_iter()
            .map(|f| spec.terms().iter().map(|&t| f.term(t)).collect())
            .collect();

        let rows: Vec<(Vec<f64>, f64)> = centers
            .par_iter()
            .map(|meta| {
                let tw = window(|i| g.t(i), g.nt, meta.t_c, tg.r_t, bump, true);
                let dtw = window(|i| g.t(i), g.nt, meta.t_c, tg.r_t, |s| bump_derivative(s) / tg.r_t, true);
                let xw = window(|j| g.x(j), g.nx, meta.x_c, tg.r_x, bump, false);
                let integrate = |field: &ndarray::Array2<f64>, time: &Window| -> f64 {
                    let mut total = 0.0;
                    for (a, &wt) in time.weights.iter().enumerate() {
                        let row = field.row(time.lo + a);
                        let mut inner = 0.0;
                        for (c, &wx) in xw.weights.iter().enumerate() {
                            inner += wx * row[xw.lo + c];
                        }
                        total += wt * inner;
                    }
                    total * cell
                };
                let theta_row: Vec<f64> = columns[meta.trajectory].iter().map(|f| integrate(f, &tw)).collect();
                let b = -integrate(self.values[meta.trajectory].derivative(0), &dtw);
                (theta_row, b)
            })
            .collect();

        let n = rows.len();
        let p = spec.len();
        let theta = DMatrix::from_fn(n, p, |i, j| rows[i].0[j]);
        let b = DVector::from_iterator(n, rows.iter().map(|r| r.1));
        if theta.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weak-form system"));
        }
        Ok(WeakSystem {
            theta,
            b,
            spec: spec.clone(),
            row_meta: centers,
        })
    }
}

/// Assembles the weak system of `set` over `spec` on test grid `tg`.
pub fn assemble(set: &TrajectorySet, spec: &LibrarySpec, tg: &TestGrid) -> Result<WeakSystem> {
    WeakAssembler::new(set)?.assemble(spec, tg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LibraryTerm, Trajectory};
    use crate::library::Provenance;
    use crate::spectral::trapezoid_2d;
    use ndarray::Array2;
    use std::f64::consts::PI;

    #[test]
    fn bump_values() {
        assert!((bump(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.0), 0.0);
        assert!((bump(0.5) - (-4.0f64 / 3.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn bump_derivative_matches_difference() {
        for &r in &[-0.9, -0.4, 0.0, 0.3, 0.77] {
            let h = 1e-6;
            let fd = (bump(r + h) - bump(r - h)) / (2.0 * h);
            assert!((bump_derivative(r) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn radii_and_center_counts() {
        let g = Grid1D::new(0.0, 2.0 * PI, 128, 0.0, 1.0, 128).unwrap();
        let tg = make_test_grid(&g, 5, 7).unwrap();
        assert!((tg.r_t - 0.18).abs() < 1e-15);
        assert!((tg.r_x - 0.2 * 2.0 * PI).abs() < 1e-12);
        assert_eq!(tg.len(), 35);
        assert_eq!(make_test_grid(&g, 8, 10).unwrap().len(), 80);
        for &t in &tg.t_centers {
            assert!(t - g.t_start >= 1.05 * tg.r_t - 1e-12 && g.t_end - t >= 1.05 * tg.r_t - 1e-12);
        }
    }

    #[test]
    fn small_grid_is_rejected() {
        let g = Grid1D::new(0.0, 1.0, 8, 0.0, 1.0, 8).unwrap();
        assert!(matches!(make_test_grid(&g, 5, 7), Err(Error::TestGridTooSmall { .. })));
        let ok = Grid1D::new(0.0, 1.0, 18, 0.0, 1.0, 18).unwrap();
        assert!(make_test_grid(&ok, 2, 2).is_ok());
    }

    #[test]
    fn constant_field_rows_vanish() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64, 0.0, 1.0, 128).unwrap();
        let set = TrajectorySet::new(vec![Trajectory::from_fn(g, |_, _| 1.0).unwrap()]).unwrap();
        let spec = LibrarySpec::new(vec![LibraryTerm::UXX], Provenance::Custom).unwrap();
        let tg = make_test_grid(&g, 5, 7).unwrap();
        let sys = assemble(&set, &spec, &tg).unwrap();
        assert!(sys.theta().iter().all(|v| v.abs() < 1e-12));
        // b is the trapezoid sum of φ_t, zero only to quadrature accuracy;
        // compare with ∬|φ_t| = 2ψ(0) * r_x ∫ψ
        let scale = 2.0 * (-1.0f64).exp() * tg.r_x * 0.443994;
        let worst = sys.b().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst < 1e-4 * scale, "{worst}");
    }

    #[test]
    fn row_matches_explicit_trapezoid() {
        let g = Grid1D::new(0.0, 2.0 * PI, 64, 0.0, 1.0, 64).unwrap();
        let tr = Trajectory::from_fn(g, |x, t| (x + t).sin() + 0.3 * (2.0 * x).cos()).unwrap();
        let set = TrajectorySet::new(vec![tr.clone()]).unwrap();
        let spec = LibrarySpec::new(vec![LibraryTerm::U], Provenance::Custom).unwrap();
        let tg = make_test_grid(&g, 2, 3).unwrap();
        let sys = assemble(&set, &spec, &tg).unwrap();
        for (row, meta) in sys.row_meta().iter().enumerate() {
            let ti: Vec<usize> = (0..g.nt).filter(|&i| (g.t(i) - meta.t_c).abs() <= tg.r_t).collect();
            let xj: Vec<usize> = (0..g.nx).filter(|&j| (g.x(j) - meta.x_c).abs() <= tg.r_x).collect();
            let block = Array2::from_shape_fn((ti.len(), xj.len()), |(a, c)| {
                let (i, j) = (ti[a], xj[c]);
                tr.values()[[i, j]] * bump((g.t(i) - meta.t_c) / tg.r_t) * bump((g.x(j) - meta.x_c) / tg.r_x)
            });
            let expect = trapezoid_2d(block.view(), g.dx(), g.dt());
            assert!((sys.theta()[(row, 0)] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn restrict_keeps_rows() {
        let g = Grid1D::new(0.0, 2.0 * PI, 32, 0.0, 1.0, 32).unwrap();
        let set = TrajectorySet::new(vec![Trajectory::from_fn(g, |x, t| x.sin() * (-t).exp()).unwrap()]).unwrap();
        let sys = assemble(&set, &LibrarySpec::standard(), &make_test_grid(&g, 3, 3).unwrap()).unwrap();
        let sub = LibrarySpec::new(vec![LibraryTerm::UXX, LibraryTerm::U], Provenance::Custom).unwrap();
        let r = sys.restrict(&sub).unwrap();
        assert_eq!(r.ncols(), 2);
        for i in 0..sys.nrows() {
            assert_eq!(r.theta()[(i, 0)], sys.theta()[(i, 4)]);
            assert_eq!(r.theta()[(i, 1)], sys.theta()[(i, 0)]);
        }
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("trajectory,t_c,x_c,u_xx,u,b\n"));
        assert_eq!(text.lines().count(), sys.nrows() + 1);
    }
}
