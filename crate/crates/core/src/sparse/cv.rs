//! K-fold cross-validated choice of the LASSO penalty.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::lasso::lasso;
use crate::error::{Error, Result};
use crate::linalg::{normalize_columns, select_entries, select_rows};
use crate::rng::{RngStream, STREAM_CV_PERMUTATION};

/// How the nominal penalty maps onto the solver objective
/// `‖b - Θξ‖² + λ_eff ‖ξ‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyScale {
    /// `λ_eff = λ`.
    Literal,
    /// `λ_eff = 2 n λ` for `n` fitted rows, i.e. the nominal penalty is
    /// applied to the mean squared residual with a factor one half.
    PerRow,
}

impl PenaltyScale {
    pub fn effective(self, lambda: f64, rows: usize) -> f64 {
        match self {
            PenaltyScale::Literal => lambda,
            PenaltyScale::PerRow => 2.0 * rows as f64 * lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LassoConfig {
    pub lambda_grid: Vec<f64>,
    pub cv_folds: usize,
    pub coord_tol: f64,
    pub max_sweeps: usize,
    pub penalty_scale: PenaltyScale,
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda_grid: logspace(1e-6, 1e-1, 60),
            cv_folds: 5,
            coord_tol: 1e-9,
            max_sweeps: 10_000,
            penalty_scale: PenaltyScale::PerRow,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.is_empty() || self.lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("lambda grid must be nonempty and strictly ascending".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidArgument("need at least two CV folds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub lambda_star: f64,
    /// Coefficients in the unit-normalized coordinates.
    pub xi_norm: Vec<f64>,
    /// `(λ, mean held-out R²)` for every grid value.
    pub curve: Vec<(f64, f64)>,
    pub column_norms: Vec<f64>,
    pub b_norm: f64,
    /// Some training fold had fewer rows than columns.
    pub underdetermined: bool,
    /// Every fit reached the update tolerance.
    pub converged: bool,
}

fn held_out_r2(theta: &DMatrix<f64>, b: &DVector<f64>, xi: &[f64]) -> f64 {
    let pred = theta * DVector::from_column_slice(xi);
    let ss_res = (b - pred).norm_squared();
    let mean = b.mean();
    let ss_tot: f64 = b.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Cross-validated LASSO with the fold permutation drawn from `seed`.
pub fn lasso_cv(theta: &DMatrix<f64>, b: &DVector<f64>, config: &LassoConfig, seed: u64) -> Result<CvResult> {
    let perm = RngStream::substream(seed, STREAM_CV_PERMUTATION).permutation(theta.nrows());
    lasso_cv_with_permutation(theta, b, config, &perm)
}

/// Cross-validated LASSO with an explicit row permutation; fold `k` holds
/// the `k`-th contiguous block of `perm`.
pub fn lasso_cv_with_permutation(
    theta: &DMatrix<f64>,
    b: &DVector<f64>,
    config: &LassoConfig,
    perm: &[usize],
) -> Result<CvResult> {
    config.validate()?;
    let (n, p) = theta.shape();
    if b.len() != n || perm.len() != n {
        return Err(Error::Shape {
            expected: n.to_string(),
            got: format!("b: {}, permutation: {}", b.len(), perm.len()),
        });
    }
    if n < config.cv_folds {
        return Err(Error::InvalidArgument(format!("{n} rows is fewer than {} folds", config.cv_folds)));
    }
    let (theta_n, column_norms) = normalize_columns(theta);
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CvResult {
            lambda_star: config.lambda_grid[0],
            xi_norm: vec![0.0; p],
            curve: config.lambda_grid.iter().map(|&l| (l, 0.0)).collect(),
            column_norms,
            b_norm,
            underdetermined: false,
            converged: true,
        });
    }
    let b_n = b / b_norm;

    let k = config.cv_folds;
    let folds: Vec<(Vec<usize>, Vec<usize>)> = (0..k)
        .map(|f| {
            let (lo, hi) = (f * n / k, (f + 1) * n / k);
            let test = perm[lo..hi].to_vec();
            let train: Vec<usize> = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
            (train, test)
        })
        .collect();
    let underdetermined = folds.iter().any(|(train, _)| train.len() < p);
    let fold_data: Vec<_> = folds
        .iter()
        .map(|(train, test)| {
            (
                select_rows(&theta_n, train),
                select_entries(&b_n, train),
                select_rows(&theta_n, test),
                select_entries(&b_n, test),
            )
        })
        .collect();

    let scored: Vec<(f64, bool)> = config
        .lambda_grid
        .par_iter()
        .map(|&lambda| {
            let mut total = 0.0;
            let mut ok = true;
            for (tr_a, tr_b, te_a, te_b) in &fold_data {
                let eff = config.penalty_scale.effective(lambda, tr_a.nrows());
                let fit = lasso(tr_a, tr_b, eff, config.coord_tol, config.max_sweeps);
                ok &= fit.converged;
                total += held_out_r2(te_a, te_b, &fit.xi);
            }
            (total / k as f64, ok)
        })
        .collect();

    let mut best = 0;
    for (i, (score, _)) in scored.iter().enumerate() {
        if *score > scored[best].0 {
            best = i;
        }
    }
    let lambda_star = config.lambda_grid[best];
    let eff = config.penalty_scale.effective(lambda_star, n);
    let fit = lasso(&theta_n, &b_n, eff, config.coord_tol, config.max_sweeps);
    Ok(CvResult {
        lambda_star,
        xi_norm: fit.xi,
        curve: config.lambda_grid.iter().copied().zip(scored.iter().map(|s| s.0)).collect(),
        column_norms,
        b_norm,
        underdetermined,
        converged: fit.converged && scored.iter().all(|s| s.1),
    })
}

/// CSV of the CV curve: `lambda,mean_r2`.
pub fn cv_curve_csv(result: &CvResult) -> String {
    let mut out = String::from("lambda,mean_r2\n");
    for (l, s) in &result.curve {
        out.push_str(&format!("{l},{s}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, noise: f64, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = RngStream::new(seed);
        let theta = DMatrix::from_fn(n, 4, |_, _| rng.standard_normal());
        let mut b = theta.column(1) * 0.8 - theta.column(3) * 0.3;
        for v in b.iter_mut() {
            *v += noise * rng.standard_normal();
        }
        (theta, b)
    }

    #[test]
    fn grid_shape() {
        let g = LassoConfig::default().lambda_grid;
        assert_eq!(g.len(), 60);
        assert!((g[0] - 1e-6).abs() < 1e-18 && (g[59] - 1e-1).abs() < 1e-15);
    }

    #[test]
    fn deterministic_per_seed() {
        let (theta, b) = toy(60, 0.05, 1);
        let cfg = LassoConfig::default();
        let a = lasso_cv(&theta, &b, &cfg, 7).unwrap();
        let c = lasso_cv(&theta, &b, &cfg, 7).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn permutation_coupling() {
        let (theta, b) = toy(40, 0.1, 2);
        let cfg = LassoConfig::default();
        let perm = RngStream::substream(9, STREAM_CV_PERMUTATION).permutation(40);
        let base = lasso_cv_with_permutation(&theta, &b, &cfg, &perm).unwrap();
        // reorder the rows by `q`; row i of the new system is row q[i] of the old
        let q = RngStream::new(123).permutation(40);
        let theta_q = select_rows(&theta, &q);
        let b_q = select_entries(&b, &q);
        let mut inv = vec![0; 40];
        for (i, &qi) in q.iter().enumerate() {
            inv[qi] = i;
        }
        let perm_q: Vec<usize> = perm.iter().map(|&r| inv[r]).collect();
        let moved = lasso_cv_with_permutation(&theta_q, &b_q, &cfg, &perm_q).unwrap();
        assert_eq!(base.lambda_star, moved.lambda_star);
        for (x, y) in base.xi_norm.iter().zip(&moved.xi_norm) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_sparse_support() {
        let (theta, b) = toy(200, 0.01, 3);
        let r = lasso_cv(&theta, &b, &LassoConfig::default(), 42).unwrap();
        assert!(r.xi_norm[1].abs() > 0.1 && r.xi_norm[3].abs() > 0.05);
    }

    #[test]
    fn zero_response() {
        let (theta, _) = toy(20, 0.0, 4);
        let r = lasso_cv(&theta, &DVector::zeros(20), &LassoConfig::default(), 1).unwrap();
        assert!(r.xi_norm.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_few_rows() {
        let (theta, b) = toy(4, 0.0, 5);
        assert!(lasso_cv(&theta, &b, &LassoConfig::default(), 1).is_err());
    }
}
