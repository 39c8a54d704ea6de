//! Galilean threshold sweep: detection precision/recall as a function of τ.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::{generate_set, Pde, PdeSpec};
use crate::symmetry::galilean_evidence;

pub const SWEEP_POSITIVES: [Pde; 2] = [Pde::Burgers, Pde::Kdv];
pub const SWEEP_NEGATIVES: [Pde; 3] = [Pde::Heat, Pde::FisherKpp, Pde::AdvDiff];
pub const SWEEP_NOISE: [f64; 3] = [0.0, 0.05, 0.10];
pub const SWEEP_TAUS: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];

/// Galilean evidence for one labelled data set. A failed evaluation stores
/// NaN and never counts as a detection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCase {
    pub pde: Pde,
    pub noise: f64,
    pub seed: u64,
    pub positive: bool,
    pub energy_fraction: f64,
    pub c1: f64,
}

impl SweepCase {
    pub fn detected(&self, tau: f64) -> bool {
        self.energy_fraction > tau && self.c1.abs() > tau
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn sweep_cases(seeds: &[u64], m: usize, nx: usize, nt: usize) -> Vec<SweepCase> {
    let mut specs = Vec::new();
    for (pdes, positive) in [(&SWEEP_POSITIVES[..], true), (&SWEEP_NEGATIVES[..], false)] {
        for &pde in pdes {
            for &noise in &SWEEP_NOISE {
                for &seed in seeds {
                    specs.push((pde, noise, seed, positive));
                }
            }
        }
    }
    specs
        .into_par_iter()
        .map(|(pde, noise, seed, positive)| {
            let spec = PdeSpec::new(pde);
            let ev = spec
                .grid(nx, nt)
                .and_then(|g| generate_set(&spec, &g, m, noise, seed))
                .and_then(|set| galilean_evidence(&set));
            let (energy_fraction, c1) = ev.map(|e| (e.energy_fraction, e.c1)).unwrap_or((f64::NAN, f64::NAN));
            SweepCase {
                pde,
                noise,
                seed,
                positive,
                energy_fraction,
                c1,
            }
        })
        .collect()
}

pub fn sweep_rows(cases: &[SweepCase], taus: &[f64]) -> Vec<SweepRow> {
    taus.iter()
        .map(|&tau| {
            let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
            for c in cases {
                match (c.positive, c.detected(tau)) {
                    (true, true) => tp += 1,
                    (true, false) => fn_ += 1,
                    (false, true) => fp += 1,
                    (false, false) => tn += 1,
                }
            }
            let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            SweepRow {
                tau,
                tp,
                fp,
                tn,
                fn_,
                precision,
                recall,
                f1,
            }
        })
        .collect()
}

/// Evidence is computed once per data set and thresholded at every τ.
pub fn run_threshold_sweep(taus: &[f64], seeds: &[u64]) -> Result<(Vec<SweepCase>, Vec<SweepRow>)> {
    if taus.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one tau and one seed".into()));
    }
    if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidArgument(format!("invalid tau {t}")));
    }
    let cases = sweep_cases(seeds, 3, 128, 128);
    let rows = sweep_rows(&cases, taus);
    Ok((cases, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(positive: bool, f: f64, c1: f64) -> SweepCase {
        SweepCase {
            pde: Pde::Heat,
            noise: 0.0,
            seed: 0,
            positive,
            energy_fraction: f,
            c1,
        }
    }

    #[test]
    fn confusion_counts() {
        let cases = vec![
            case(true, 0.5, 1.0),
            case(true, 0.03, 1.0),
            case(false, 0.2, 0.2),
            case(false, 0.0, 0.0),
            case(false, f64::NAN, f64::NAN),
        ];
        let rows = sweep_rows(&cases, &[0.05, 1.0]);
        let r = &rows[0];
        assert_eq!((r.tp, r.fp, r.tn, r.fn_), (1, 1, 2, 1));
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 0.5);
        assert_eq!((rows[1].tp, rows[1].fp), (0, 0));
        assert_eq!(rows[1].precision, 0.0);
    }
}
