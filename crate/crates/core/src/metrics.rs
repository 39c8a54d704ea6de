//! Support extraction and the term-level scores used to grade an identification.

use serde::Serialize;

use crate::domain::{CoefficientVector, LibraryTerm, SupportSet};
use crate::error::{Error, Result};

/// Default magnitude above which a coefficient counts as active.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

/// Terms whose coefficient magnitude strictly exceeds `threshold`.
pub fn support_from_coeffs(coeffs: &CoefficientVector, threshold: f64) -> SupportSet {
    coeffs
        .entries()
        .iter()
        .filter(|(_, v)| v.abs() > threshold)
        .map(|(t, _)| *t)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Term-level precision, recall and F1. An empty prediction scores zero.
pub fn f1_score(pred: &SupportSet, truth: &SupportSet) -> Result<F1Score> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let hits = pred.intersection(truth).count() as f64;
    let precision = if pred.is_empty() { 0.0 } else { hits / pred.len() as f64 };
    let recall = hits / truth.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(F1Score { precision, recall, f1 })
}

/// Mean absolute coefficient error over the standard ten-term universe
/// (plus any non-standard terms either vector carries). Missing terms are
/// treated as zero.
pub fn coefficient_error(est: &CoefficientVector, truth: &CoefficientVector) -> f64 {
    let mut terms: Vec<LibraryTerm> = LibraryTerm::STANDARD.to_vec();
    for t in est.terms().into_iter().chain(truth.terms()) {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    let total: f64 = terms.iter().map(|&t| (est.get(t) - truth.get(t)).abs()).sum();
    total / terms.len() as f64
}
