//! Small dense least-squares helpers shared by the regression stages.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm least-squares solution of `a x = b` via SVD. Singular
/// values below `max(m, n) * eps * s_max` are treated as zero. Returns the
/// solution and the number of discarded directions.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, usize) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return (DVector::zeros(n), n);
    }
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let cutoff = m.max(n) as f64 * f64::EPSILON * s_max;
    let dropped = svd.singular_values.iter().filter(|&&s| s <= cutoff).count();
    if s_max == 0.0 {
        return (DVector::zeros(n), n);
    }
    let x = svd.solve(b, cutoff).unwrap_or_else(|_| DVector::zeros(n));
    (x, dropped)
}

/// Euclidean norm of each column.
pub fn column_norms(a: &DMatrix<f64>) -> Vec<f64> {
    a.column_iter().map(|c| c.norm()).collect()
}

/// Scales each nonzero column to unit norm. Zero columns are left as is and
/// report a norm of zero.
pub fn normalize_columns(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let norms = column_norms(a);
    let mut out = a.clone();
    for (j, &nrm) in norms.iter().enumerate() {
        if nrm > 0.0 {
            out.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    (out, norms)
}

/// Columns `idx` of `a`, in that order.
pub fn select_columns(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), idx.len(), |i, j| a[(i, idx[j])])
}

/// Rows `idx` of `a`, in that order.
pub fn select_rows(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), a.ncols(), |i, j| a[(idx[i], j)])
}

pub fn select_entries(b: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| b[i]))
}
