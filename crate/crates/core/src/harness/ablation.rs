//! Ablations over trajectory count, grid resolution and library size.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{aggregate, run_trials, Method, TrialResult, TrialSpec};
use crate::error::{Error, Result};
use crate::library::EXPANDED_SIZES;
use crate::pipeline::PipelineConfig;
use crate::solvers::Pde;

pub const TRAJECTORY_COUNTS: [usize; 5] = [1, 2, 3, 5, 10];
pub const RESOLUTIONS: [usize; 4] = [32, 64, 128, 256];
pub const LIBRARY_CASES: [(Pde, f64); 2] = [(Pde::Burgers, 0.05), (Pde::Heat, 0.10)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationKind {
    Trajectories,
    Resolution,
    LibraryScaling,
}

impl AblationKind {
    pub fn name(&self) -> &'static str {
        match self {
            AblationKind::Trajectories => "trajectories",
            AblationKind::Resolution => "resolution",
            AblationKind::LibraryScaling => "library_scaling",
        }
    }
}

impl fmt::Display for AblationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "trajectories" | "m" => Ok(AblationKind::Trajectories),
            "resolution" | "nx" => Ok(AblationKind::Resolution),
            "library_scaling" | "library" => Ok(AblationKind::LibraryScaling),
            _ => Err(Error::InvalidArgument(format!(
                "unknown ablation {s:?}; expected trajectories, resolution or library-scaling"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationParams {
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Values of the ablated parameter; `None` uses the defaults of the kind.
    pub values: Option<Vec<usize>>,
}

impl AblationParams {
    pub fn defaults(kind: AblationKind) -> Self {
        let seeds = match kind {
            AblationKind::LibraryScaling => (42..47).collect(),
            _ => (42..52).collect(),
        };
        AblationParams {
            seeds,
            methods: Method::ALL.to_vec(),
            values: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub ablation: AblationKind,
    pub pde: Pde,
    pub noise: f64,
    pub value: usize,
    pub method: Method,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub ce_mean: f64,
    pub mean_lib: f64,
    pub fallback_count: usize,
}

fn trial(pde: Pde, noise: f64, seed: u64) -> TrialSpec {
    TrialSpec {
        pde,
        noise,
        seed,
        m: 3,
        nx: 128,
        nt: 128,
        library_size: 10,
    }
}

/// Trajectory count on Burgers at 10% noise, grid resolution on clean
/// Burgers with `nt = 128`, or base-library size on Burgers 5% and Heat 10%.
pub fn run_ablation(kind: AblationKind, params: &AblationParams, config: &PipelineConfig) -> Result<Vec<AblationRow>> {
    if params.seeds.is_empty() || params.methods.is_empty() {
        return Err(Error::InvalidArgument("ablation needs seeds and methods".into()));
    }
    let values = params.values.clone().unwrap_or_else(|| match kind {
        AblationKind::Trajectories => TRAJECTORY_COUNTS.to_vec(),
        AblationKind::Resolution => RESOLUTIONS.to_vec(),
        AblationKind::LibraryScaling => EXPANDED_SIZES.to_vec(),
    });
    if values.is_empty() || values.contains(&0) {
        return Err(Error::InvalidArgument(format!("invalid ablation values {values:?}")));
    }
    let mut specs = Vec::new();
    for &v in &values {
        for &seed in &params.seeds {
            match kind {
                AblationKind::Trajectories => specs.push(TrialSpec {
                    m: v,
                    ..trial(Pde::Burgers, 0.10, seed)
                }),
                AblationKind::Resolution => specs.push(TrialSpec {
                    nx: v,
                    ..trial(Pde::Burgers, 0.0, seed)
                }),
                AblationKind::LibraryScaling => {
                    for (pde, noise) in LIBRARY_CASES {
                        specs.push(TrialSpec {
                            library_size: v,
                            ..trial(pde, noise, seed)
                        });
                    }
                }
            }
        }
    }
    let trials = run_trials(&specs, &params.methods, config);
    let value_of = |t: &TrialResult| match kind {
        AblationKind::Trajectories => t.m,
        AblationKind::Resolution => t.nx,
        AblationKind::LibraryScaling => t.base_library_size,
    };
    let mut rows = Vec::new();
    for &v in &values {
        let group: Vec<TrialResult> = trials.iter().filter(|t| value_of(t) == v).cloned().collect();
        for c in aggregate(&group) {
            rows.push(AblationRow {
                ablation: kind,
                pde: c.pde,
                noise: c.noise,
                value: v,
                method: c.method,
                f1_mean: c.f1_mean,
                f1_std: c.f1_std,
                ce_mean: c.ce_mean,
                mean_lib: c.mean_lib,
                fallback_count: c.fallback_count,
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.pde, a.method, a.value)
            .partial_cmp(&(b.pde, b.method, b.value))
            .expect("total order")
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in [AblationKind::Trajectories, AblationKind::Resolution, AblationKind::LibraryScaling] {
            assert_eq!(k.name().parse::<AblationKind>().unwrap(), k);
        }
        assert_eq!("library-scaling".parse::<AblationKind>().unwrap(), AblationKind::LibraryScaling);
        assert!("noise".parse::<AblationKind>().is_err());
    }
}
