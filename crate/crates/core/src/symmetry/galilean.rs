//! Galilean test: energy carried by the convective term in a weak-form fit
//! that also offers the reaction terms.

use serde::Serialize;

use crate::domain::{LibraryTerm, TrajectorySet};
use crate::error::Result;
use crate::library::{LibrarySpec, Provenance};
use crate::linalg::{lstsq, normalize_columns};
use crate::weak::{make_test_grid, WeakAssembler, STAGE3_CENTERS};

pub const GALILEAN_TAU: f64 = 0.05;

/// Fit basis; the convective term comes first.
pub const GALILEAN_BASIS: [LibraryTerm; 6] = [
    LibraryTerm::U_UX,
    LibraryTerm::UXX,
    LibraryTerm::UXXX,
    LibraryTerm::U,
    LibraryTerm::U2,
    LibraryTerm::U3,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalileanEvidence {
    /// `‖c1 Θ_1‖² / ‖b‖²`.
    pub energy_fraction: f64,
    /// Physical coefficient of `u*u_x`.
    pub c1: f64,
    /// The normalized system had numerically dependent columns.
    pub rank_deficient: bool,
}

impl GalileanEvidence {
    pub fn detected(&self, tau: f64) -> bool {
        self.energy_fraction > tau && self.c1.abs() > tau
    }
}

pub fn galilean_evidence(set: &TrajectorySet) -> Result<GalileanEvidence> {
    galilean_evidence_with(&WeakAssembler::new(set)?)
}

pub fn galilean_evidence_with(assembler: &WeakAssembler) -> Result<GalileanEvidence> {
    let spec = LibrarySpec::new(GALILEAN_BASIS.to_vec(), Provenance::Custom)?;
    let (nt, nx) = STAGE3_CENTERS;
    let tg = make_test_grid(assembler.grid(), nt, nx)?;
    let sys = assembler.assemble(&spec, &tg)?;
    let (tn, norms) = normalize_columns(sys.theta());
    let (x, dropped) = lstsq(&tn, sys.b());
    let c1 = if norms[0] > 0.0 { x[0] / norms[0] } else { 0.0 };
    let b2 = sys.b().norm_squared();
    let energy_fraction = if b2 > 0.0 {
        (sys.theta().column(0) * c1).norm_squared() / b2
    } else {
        0.0
    };
    Ok(GalileanEvidence {
        energy_fraction,
        c1,
        rank_deficient: dropped > 0,
    })
}

/// `(detected, energy fraction, c1)` at threshold `tau`.
pub fn detect_galilean(set: &TrajectorySet, tau: f64) -> Result<(bool, f64, f64)> {
    let e = galilean_evidence(set)?;
    Ok((e.detected(tau), e.energy_fraction, e.c1))
}
