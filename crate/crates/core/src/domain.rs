//! Shared value types: grids, trajectories, library terms and coefficient vectors.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Uniform periodic space grid times uniform time grid.
///
/// The spatial grid holds `nx` points `x0 + j*dx`, `j = 0..nx`; the point
/// `x0 + length` is the periodic image of `x0` and is not stored. The time
/// grid holds `nt` samples including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x0: f64,
    pub length: f64,
    pub nx: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub nt: usize,
}

impl Grid1D {
    pub fn new(x0: f64, length: f64, nx: usize, t_start: f64, t_end: f64, nt: usize) -> Result<Self> {
        let grid = Grid1D {
            x0,
            length,
            nx,
            t_start,
            t_end,
            nt,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be > 0, got {}", self.length)));
        }
        if self.nx < 8 {
            return Err(Error::InvalidGrid(format!("nx must be >= 8, got {}", self.nx)));
        }
        if self.nt < 8 {
            return Err(Error::InvalidGrid(format!("nt must be >= 8, got {}", self.nt)));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidGrid(format!(
                "t_end ({}) must exceed t_start ({})",
                self.t_end, self.t_start
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidGrid("x0 must be finite".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.nt - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|j| self.x(j)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|i| self.t(i)).collect()
    }
}

/// A real field sampled on a [`Grid1D`]; row `i` is the field at time `t_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid1D,
    values: Array2<f64>,
}

impl Trajectory {
    pub fn new(grid: Grid1D, values: Array2<f64>) -> Result<Self> {
        grid.validate()?;
        if values.dim() != (grid.nt, grid.nx) {
            return Err(Error::Shape {
                expected: format!("{}x{}", grid.nt, grid.nx),
                got: format!("{}x{}", values.nrows(), values.ncols()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory values"));
        }
        Ok(Trajectory { grid, values })
    }

    /// Builds a trajectory by evaluating `f(x, t)` on every grid point.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = Array2::from_shape_fn((grid.nt, grid.nx), |(i, j)| f(grid.x(j), grid.t(i)));
        Trajectory::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }
}

/// Trajectories sharing one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    grid: Grid1D,
    trajectories: Vec<Trajectory>,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let first = trajectories
            .first()
            .ok_or_else(|| Error::InvalidArgument("trajectory set must hold at least one trajectory".into()))?;
        let grid = *first.grid();
        if trajectories.iter().any(|t| *t.grid() != grid) {
            return Err(Error::InvalidArgument("all trajectories must share one grid".into()));
        }
        Ok(TrajectorySet { grid, trajectories })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }
}

/// Highest spatial derivative order a library factor may carry.
pub const MAX_DERIVATIVE: usize = 4;

/// A monomial in `u` and its spatial derivatives.
///
/// `exponents[d]` is the power of the `d`-th spatial derivative, so
/// `u^2*u_x` is `[2, 1, 0, 0, 0]`. The ten standard candidates are
/// exposed as associated constants; larger libraries add further
/// products of the same form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LibraryTerm {
    exponents: [u8; MAX_DERIVATIVE + 1],
}

impl LibraryTerm {
    pub const U: LibraryTerm = LibraryTerm::from_exponents([1, 0, 0, 0, 0]);
    pub const U2: LibraryTerm = LibraryTerm::from_exponents([2, 0, 0, 0, 0]);
    pub const U3: LibraryTerm = LibraryTerm::from_exponents([3, 0, 0, 0, 0]);
    pub const UX: LibraryTerm = LibraryTerm::from_exponents([0, 1, 0, 0, 0]);
    pub const UXX: LibraryTerm = LibraryTerm::from_exponents([0, 0, 1, 0, 0]);
    pub const UXXX: LibraryTerm = LibraryTerm::from_exponents([0, 0, 0, 1, 0]);
    pub const UXXXX: LibraryTerm = LibraryTerm::from_exponents([0, 0, 0, 0, 1]);
    pub const U_UX: LibraryTerm = LibraryTerm::from_exponents([1, 1, 0, 0, 0]);
    pub const U_UXX: LibraryTerm = LibraryTerm::from_exponents([1, 0, 1, 0, 0]);
    pub const U2_UX: LibraryTerm = LibraryTerm::from_exponents([2, 1, 0, 0, 0]);

    /// The ten standard candidates in canonical order.
    pub const STANDARD: [LibraryTerm; 10] = [
        Self::U,
        Self::U2,
        Self::U3,
        Self::UX,
        Self::UXX,
        Self::UXXX,
        Self::UXXXX,
        Self::U_UX,
        Self::U_UXX,
        Self::U2_UX,
    ];

    pub const fn from_exponents(exponents: [u8; MAX_DERIVATIVE + 1]) -> Self {
        LibraryTerm { exponents }
    }

    pub fn exponents(&self) -> [u8; MAX_DERIVATIVE + 1] {
        self.exponents
    }

    /// Highest derivative order appearing in the product.
    pub fn derivative_order(&self) -> usize {
        (0..=MAX_DERIVATIVE).rev().find(|&d| self.exponents[d] > 0).unwrap_or(0)
    }

    /// Total polynomial degree in `u` and its derivatives.
    pub fn power(&self) -> usize {
        self.exponents.iter().map(|&e| e as usize).sum()
    }

    /// Position in the standard ten-term list, if this is a standard term.
    pub fn standard_index(&self) -> Option<usize> {
        Self::STANDARD.iter().position(|t| t == self)
    }

    pub fn is_standard(&self) -> bool {
        self.standard_index().is_some()
    }

    /// ASCII tag, e.g. `u^2*u_x`.
    pub fn tag(&self) -> String {
        let mut factors = Vec::new();
        for (d, &e) in self.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let base = if d == 0 {
                "u".to_string()
            } else {
                format!("u_{}", "x".repeat(d))
            };
            if e == 1 {
                factors.push(base);
            } else {
                factors.push(format!("{base}^{e}"));
            }
        }
        if factors.is_empty() {
            "1".into()
        } else {
            factors.join("*")
        }
    }

    /// Parses a tag produced by [`LibraryTerm::tag`].
    pub fn from_tag(tag: &str) -> Result<Self> {
        let mut exponents = [0u8; MAX_DERIVATIVE + 1];
        let bad = || Error::UnknownTerm(tag.to_string());
        if tag.trim().is_empty() {
            return Err(bad());
        }
        for factor in tag.split('*') {
            let (base, pow) = match factor.split_once('^') {
                Some((b, p)) => (b, p.parse::<u8>().map_err(|_| bad())?),
                None => (factor, 1),
            };
            if pow == 0 {
                return Err(bad());
            }
            let order = if base == "u" {
                0
            } else if let Some(xs) = base.strip_prefix("u_") {
                if xs.is_empty() || xs.len() > MAX_DERIVATIVE || xs.chars().any(|c| c != 'x') {
                    return Err(bad());
                }
                xs.len()
            } else {
                return Err(bad());
            };
            exponents[order] = exponents[order].checked_add(pow).ok_or_else(bad)?;
        }
        Ok(LibraryTerm { exponents })
    }
}

impl fmt::Display for LibraryTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl Ord for LibraryTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |t: &LibraryTerm| (t.standard_index().unwrap_or(usize::MAX), t.power(), t.exponents);
        key(self).cmp(&key(other))
    }
}

impl PartialOrd for LibraryTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for LibraryTerm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> Deserialize<'de> for LibraryTerm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LibraryTerm::from_tag(&s).map_err(serde::de::Error::custom)
    }
}

/// Ordered `(term, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientVector {
    entries: Vec<(LibraryTerm, f64)>,
}

impl CoefficientVector {
    pub fn new(entries: Vec<(LibraryTerm, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (t, v) in &entries {
            if !v.is_finite() {
                return Err(Error::NonFinite("coefficient vector"));
            }
            if !seen.insert(*t) {
                return Err(Error::InvalidArgument(format!("duplicate term {t}")));
            }
        }
        Ok(CoefficientVector { entries })
    }

    /// All-zero vector over `terms`.
    pub fn zeros(terms: &[LibraryTerm]) -> Self {
        CoefficientVector {
            entries: terms.iter().map(|&t| (t, 0.0)).collect(),
        }
    }

    pub fn from_values(terms: &[LibraryTerm], values: &[f64]) -> Result<Self> {
        if terms.len() != values.len() {
            return Err(Error::Shape {
                expected: terms.len().to_string(),
                got: values.len().to_string(),
            });
        }
        CoefficientVector::new(terms.iter().copied().zip(values.iter().copied()).collect())
    }

    pub fn entries(&self) -> &[(LibraryTerm, f64)] {
        &self.entries
    }

    pub fn terms(&self) -> Vec<LibraryTerm> {
        self.entries.iter().map(|(t, _)| *t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, v)| *v).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value of `term`, zero when absent.
    pub fn get(&self, term: LibraryTerm) -> f64 {
        self.entries
            .iter()
            .find(|(t, _)| *t == term)
            .map(|(_, v)| *v)
            .unwrap_or(0.0)
    }

    /// Re-expresses the vector over `terms`; missing terms become zero and
    /// terms outside `terms` are dropped.
    pub fn over(&self, terms: &[LibraryTerm]) -> CoefficientVector {
        CoefficientVector {
            entries: terms.iter().map(|&t| (t, self.get(t))).collect(),
        }
    }

    /// Expresses the vector over the standard ten terms followed by any
    /// non-standard terms it carries.
    pub fn over_universe(&self) -> CoefficientVector {
        let mut terms = LibraryTerm::STANDARD.to_vec();
        terms.extend(self.terms().into_iter().filter(|t| !t.is_standard()));
        self.over(&terms)
    }
}

impl Serialize for CoefficientVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (t, v) in &self.entries {
            map.serialize_entry(&t.tag(), v)?;
        }
        map.end()
    }
}

/// A set of library terms.
pub type SupportSet = BTreeSet<LibraryTerm>;
