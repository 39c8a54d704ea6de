//! Time-translation test: the real part of the Fourier symbol estimated on
//! the first and second halves of the record should agree. The score is the
//! power-weighted median of the per-mode relative discrepancy.

use crate::domain::Trajectory;
use crate::error::{Error, Result};

use super::symbol::estimate_symbol_window;

pub const TEMPORAL_THRESHOLD: f64 = 0.4;
/// Second-half energy below this fraction of the first half triggers window shrinking.
pub const DECAY_RATIO: f64 = 1e-3;
/// Each shrunk window must hold at least this fraction of the total energy.
pub const MIN_WINDOW_ENERGY: f64 = 0.1;
const MIN_SAMPLES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalOutcome {
    pub detected: bool,
    pub score: f64,
    /// Number of leading samples used (`nt` when no shrinking happened).
    pub span: usize,
}

/// Chooses the span `[0, e)` whose halves are compared.
fn choose_span(energy: &[f64]) -> usize {
    let nt = energy.len();
    let sum = |r: std::ops::Range<usize>| energy[r].iter().sum::<f64>();
    let total = sum(0..nt);
    if sum(nt / 2..nt) >= DECAY_RATIO * sum(0..nt / 2) {
        return nt;
    }
    for e in (MIN_SAMPLES..=nt).rev() {
        let (first, second) = (sum(0..e / 2), sum(e / 2..e));
        if first >= MIN_WINDOW_ENERGY * total && second >= MIN_WINDOW_ENERGY * total {
            return e;
        }
    }
    MIN_SAMPLES
}

/// Smallest value whose cumulative weight reaches half the total; the two
/// straddling values are averaged on an exact tie.
pub fn weighted_median(mut items: Vec<(f64, f64)>) -> f64 {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = items.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (i, &(v, w)) in items.iter().enumerate() {
        acc += w;
        if acc == 0.5 * total && i + 1 < items.len() {
            return 0.5 * (v + items[i + 1].0);
        }
        if acc > 0.5 * total {
            return v;
        }
    }
    items.last().map_or(f64::NAN, |p| p.0)
}

pub fn detect_temporal_translation(traj: &Trajectory) -> Result<TemporalOutcome> {
    let nt = traj.grid().nt;
    if nt < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("temporal test needs nt >= {MIN_SAMPLES}, got {nt}")));
    }
    let energy: Vec<f64> = traj.values().rows().into_iter().map(|r| r.dot(&r)).collect();
    let span = choose_span(&energy);
    let first = estimate_symbol_window(traj, 0, span / 2)?;
    let second = estimate_symbol_window(traj, span / 2, span)?;
    let items: Vec<(f64, f64)> = (0..first.k.len())
        .filter(|&i| first.reliable[i] && second.reliable[i])
        .map(|i| {
            let (a, b) = (first.sigma[i].re, second.sigma[i].re);
            let scale = a.abs().max(b.abs());
            let d = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
            (d, first.power[i] + second.power[i])
        })
        .collect();
    if items.is_empty() {
        return Err(Error::NoReliableModes);
    }
    let score = weighted_median(items);
    Ok(TemporalOutcome {
        detected: score < TEMPORAL_THRESHOLD,
        score,
        span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_median_cases() {
        assert_eq!(weighted_median(vec![(3.0, 1.0), (1.0, 1.0), (2.0, 1.0)]), 2.0);
        assert_eq!(weighted_median(vec![(0.1, 100.0), (0.9, 1.0), (0.8, 1.0)]), 0.1);
        assert_eq!(weighted_median(vec![(1.0, 1.0), (3.0, 1.0)]), 2.0);
    }

    #[test]
    fn span_untouched_without_decay() {
        let e = vec![1.0; 64];
        assert_eq!(choose_span(&e), 64);
        let decayed: Vec<f64> = (0..64).map(|i| (-(i as f64) / 4.0).exp()).collect();
        let s = choose_span(&decayed);
        assert!(s < 64);
        let total: f64 = decayed.iter().sum();
        assert!(decayed[s / 2..s].iter().sum::<f64>() >= MIN_WINDOW_ENERGY * total);
    }
}
