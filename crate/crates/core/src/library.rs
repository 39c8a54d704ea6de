//! Candidate library terms: pointwise evaluation on trajectories and the
//! symmetry-based reductions.

use std::collections::BTreeSet;
use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::domain::{LibraryTerm, Trajectory, MAX_DERIVATIVE};
use crate::error::{Error, Result};
use crate::spectral::SpectralWorkspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Standard,
    Galilean,
    GalileanOdd,
    StabilitySelected,
    Custom,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Standard => "standard",
            Provenance::Galilean => "galilean",
            Provenance::GalileanOdd => "galilean_odd",
            Provenance::StabilitySelected => "stability_selected",
            Provenance::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// An ordered, duplicate-free, nonempty list of library terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibrarySpec {
    terms: Vec<LibraryTerm>,
    provenance: Provenance,
}

impl LibrarySpec {
    pub fn new(terms: Vec<LibraryTerm>, provenance: Provenance) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("library must not be empty".into()));
        }
        let mut seen = BTreeSet::new();
        for t in &terms {
            if !seen.insert(*t) {
                return Err(Error::InvalidArgument(format!("duplicate library term {t}")));
            }
        }
        Ok(LibrarySpec { terms, provenance })
    }

    pub fn standard() -> Self {
        LibrarySpec {
            terms: LibraryTerm::STANDARD.to_vec(),
            provenance: Provenance::Standard,
        }
    }

    pub fn terms(&self) -> &[LibraryTerm] {
        &self.terms
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: LibraryTerm) -> bool {
        self.terms.contains(&term)
    }

    pub fn position(&self, term: LibraryTerm) -> Option<usize> {
        self.terms.iter().position(|&t| t == term)
    }

    pub fn tags(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.tag()).collect()
    }
}

/// The seven-term library used when Galilean invariance is detected.
pub fn galilean_reduced() -> LibrarySpec {
    LibrarySpec {
        terms: vec![
            LibraryTerm::UX,
            LibraryTerm::UXX,
            LibraryTerm::UXXX,
            LibraryTerm::UXXXX,
            LibraryTerm::U_UX,
            LibraryTerm::U_UXX,
            LibraryTerm::U2_UX,
        ],
        provenance: Provenance::Galilean,
    }
}

/// Removes `u*u_xx` and `u^2` when present.
pub fn odd_reflection_prune(spec: &LibrarySpec) -> LibrarySpec {
    let terms: Vec<LibraryTerm> = spec
        .terms
        .iter()
        .copied()
        .filter(|&t| t != LibraryTerm::U_UXX && t != LibraryTerm::U2)
        .collect();
    let provenance = match spec.provenance {
        Provenance::Galilean | Provenance::GalileanOdd => Provenance::GalileanOdd,
        _ if terms.len() == spec.terms.len() => spec.provenance,
        _ => Provenance::Custom,
    };
    if terms.is_empty() {
        return spec.clone();
    }
    LibrarySpec { terms, provenance }
}

/// Extra products appended to the standard library, in order.
pub const EXPANSION_TAGS: [&str; 20] = [
    "u^4",
    "u*u_xxx",
    "u*u_xxxx",
    "u^2*u_xx",
    "u^3*u_x",
    "u_x^2",
    "u_x*u_xx",
    "u_x*u_xxx",
    "u_xx^2",
    "u^2*u_xxx",
    "u^3*u_xx",
    "u^5",
    "u_x^3",
    "u*u_x*u_xx",
    "u^2*u_x^2",
    "u_xx*u_xxx",
    "u^4*u_x",
    "u_x*u_xxxx",
    "u^3*u_xxx",
    "u*u_xx^2",
];

pub const EXPANDED_SIZES: [usize; 5] = [10, 15, 20, 25, 30];

/// Standard library followed by the first `size - 10` expansion terms.
pub fn expanded_library(size: usize) -> Result<LibrarySpec> {
    if !EXPANDED_SIZES.contains(&size) {
        return Err(Error::InvalidArgument(format!(
            "unsupported library size {size}; expected one of {EXPANDED_SIZES:?}"
        )));
    }
    if size == 10 {
        return Ok(LibrarySpec::standard());
    }
    let mut terms = LibraryTerm::STANDARD.to_vec();
    for tag in &EXPANSION_TAGS[..size - 10] {
        terms.push(LibraryTerm::from_tag(tag)?);
    }
    LibrarySpec::new(terms, Provenance::Custom)
}

/// Spectral derivatives `u, u_x, ..., u_xxxx` of one trajectory, from which
/// any library term is formed pointwise.
#[derive(Debug, Clone)]
pub struct DerivativeFields {
    fields: Vec<Array2<f64>>,
}

impl DerivativeFields {
    pub fn new(traj: &Trajectory) -> Result<Self> {
        let grid = traj.grid();
        let ws = SpectralWorkspace::new(grid.nx, grid.length)?;
        Self::with_workspace(traj, &ws)
    }

    pub fn with_workspace(traj: &Trajectory, ws: &SpectralWorkspace) -> Result<Self> {
        let values = traj.values();
        let (nt, nx) = values.dim();
        let mut fields = vec![values.clone()];
        for _ in 1..=MAX_DERIVATIVE {
            fields.push(Array2::zeros((nt, nx)));
        }
        for (i, row) in values.rows().into_iter().enumerate() {
            let row = row.to_vec();
            for (d, deriv) in ws.derivatives_upto(&row, MAX_DERIVATIVE as u32).into_iter().enumerate() {
                fields[d + 1].row_mut(i).assign(&ndarray::Array1::from(deriv));
            }
        }
        Ok(DerivativeFields { fields })
    }

    /// Field of the derivative of the given order (0 is `u` itself).
    pub fn derivative(&self, order: usize) -> &Array2<f64> {
        &self.fields[order]
    }

    pub fn term(&self, term: LibraryTerm) -> Array2<f64> {
        let mut out = Array2::from_elem(self.fields[0].dim(), 1.0);
        for (d, &e) in term.exponents().iter().enumerate() {
            if e > 0 {
                let f = &self.fields[d];
                out.zip_mut_with(f, |o, &v| *o *= v.powi(e as i32));
            }
        }
        out
    }
}

/// Pointwise field of `term` evaluated on `traj`.
pub fn evaluate_term(traj: &Trajectory, term: LibraryTerm) -> Result<Array2<f64>> {
    Ok(DerivativeFields::new(traj)?.term(term))
}
