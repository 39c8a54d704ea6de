//! Randomized-LASSO stability selection over half-subsamples.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{LibraryTerm, TrajectorySet};
use crate::error::{Error, Result};
use crate::library::{LibrarySpec, Provenance};
use crate::linalg::normalize_columns;
use crate::rng::{RngStream, STREAM_STABILITY_BASE};
use crate::sparse::cv::PenaltyScale;
use crate::sparse::lasso::lasso;
use crate::weak::{make_test_grid, WeakAssembler, STABILITY_CENTERS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityConfig {
    pub iterations: usize,
    pub pi_threshold: f64,
    pub lambda: f64,
    pub weight_range: (f64, f64),
    pub activity_eps: f64,
    pub coord_tol: f64,
    pub max_sweeps: usize,
    pub penalty_scale: PenaltyScale,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            iterations: 50,
            pi_threshold: 0.5,
            lambda: 1e-3,
            weight_range: (0.5, 1.0),
            activity_eps: 1e-6,
            coord_tol: 1e-9,
            max_sweeps: 10_000,
            penalty_scale: PenaltyScale::PerRow,
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.weight_range;
        if self.iterations == 0 || !(self.pi_threshold > 0.0 && self.pi_threshold < 1.0) || !(0.0 < lo && lo <= hi) {
            return Err(Error::InvalidArgument("invalid stability-selection configuration".into()));
        }
        Ok(())
    }
}

/// Selection probability of every column and the indices with probability
/// strictly above the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub pi: Vec<f64>,
    pub stable: Vec<usize>,
}

/// Columns selected in one randomized half-subsample fit.
fn iteration(theta: &DMatrix<f64>, b: &DVector<f64>, config: &StabilityConfig, seed: u64, it: usize) -> Vec<bool> {
    let (n, p) = theta.shape();
    let mut rng = RngStream::substream(seed, STREAM_STABILITY_BASE + it as u64);
    let rows = rng.subset(n, n / 2);
    let (lo, hi) = config.weight_range;
    let w: Vec<f64> = (0..p).map(|_| rng.uniform(lo, hi)).collect();
    let design = DMatrix::from_fn(rows.len(), p, |i, j| theta[(rows[i], j)] / w[j]);
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|&i| b[i]));
    let eff = config.penalty_scale.effective(config.lambda, rows.len());
    let fit = lasso(&design, &rhs, eff, config.coord_tol, config.max_sweeps);
    fit.xi.iter().map(|v| v.abs() > config.activity_eps).collect()
}

/// Runs `config.iterations` randomized fits. Iteration `b` draws its subset
/// and then its weights from substream `(seed, STREAM_STABILITY_BASE + b)`,
/// so the result does not depend on scheduling.
pub fn stability_select(theta: &DMatrix<f64>, b: &DVector<f64>, config: &StabilityConfig, seed: u64) -> Result<Selection> {
    config.validate()?;
    let (n, p) = theta.shape();
    if n < 4 || b.len() != n {
        return Err(Error::InvalidArgument(format!("stability selection needs >= 4 matching rows, got {n}")));
    }
    let (theta_n, _) = normalize_columns(theta);
    let bn = b.norm();
    let b_n = if bn > 0.0 { b / bn } else { b.clone() };
    let picks: Vec<Vec<bool>> = (0..config.iterations)
        .into_par_iter()
        .map(|it| iteration(&theta_n, &b_n, config, seed, it))
        .collect();
    let mut counts = vec![0usize; p];
    for pick in &picks {
        for (c, &s) in counts.iter_mut().zip(pick) {
            *c += s as usize;
        }
    }
    let pi: Vec<f64> = counts.iter().map(|&c| c as f64 / config.iterations as f64).collect();
    let stable = (0..p).filter(|&j| pi[j] > config.pi_threshold).collect();
    Ok(Selection { pi, stable })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityProfile {
    pub terms: Vec<LibraryTerm>,
    pub pi: Vec<f64>,
}

impl StabilityProfile {
    pub fn get(&self, term: LibraryTerm) -> Option<f64> {
        self.terms.iter().position(|&t| t == term).map(|i| self.pi[i])
    }

    /// CSV `term,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("term,probability\n");
        for (t, p) in self.terms.iter().zip(&self.pi) {
            out.push_str(&format!("{t},{p}\n"));
        }
        out
    }
}

/// Library reduction by stability selection on the dense test grid. An
/// empty stable set returns `base` unchanged.
pub fn stability_gate(set: &TrajectorySet, base: &LibrarySpec, seed: u64) -> Result<(LibrarySpec, StabilityProfile)> {
    let assembler = WeakAssembler::new(set)?;
    stability_gate_with(&assembler, base, seed, &StabilityConfig::default())
}

pub fn stability_gate_with(
    assembler: &WeakAssembler,
    base: &LibrarySpec,
    seed: u64,
    config: &StabilityConfig,
) -> Result<(LibrarySpec, StabilityProfile)> {
    let (nt, nx) = STABILITY_CENTERS;
    let tg = make_test_grid(assembler.grid(), nt, nx)?;
    let sys = assembler.assemble(base, &tg)?;
    let sel = stability_select(sys.theta(), sys.b(), config, seed)?;
    let profile = StabilityProfile {
        terms: base.terms().to_vec(),
        pi: sel.pi,
    };
    if sel.stable.is_empty() {
        return Ok((base.clone(), profile));
    }
    let terms = sel.stable.iter().map(|&j| base.terms()[j]).collect();
    Ok((LibrarySpec::new(terms, Provenance::StabilitySelected)?, profile))
}
