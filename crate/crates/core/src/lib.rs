//! Identification of 1D scalar evolution PDEs from noisy trajectory data.

pub mod domain;
pub mod error;
pub mod harness;
pub mod library;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod serde_ext;
pub mod solvers;
pub mod sparse;
pub mod spectral;
pub mod stability;
pub mod symmetry;
pub mod weak;

pub use domain::{CoefficientVector, Grid1D, LibraryTerm, SupportSet, Trajectory, TrajectorySet};
pub use error::{Error, Result};
pub use library::{LibrarySpec, Provenance};
