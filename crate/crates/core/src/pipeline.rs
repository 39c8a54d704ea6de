//! The four-stage identification pipeline and the WF-LASSO baseline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{CoefficientVector, TrajectorySet};
use crate::error::{Error, Result};
use crate::library::{galilean_reduced, odd_reflection_prune, LibrarySpec};
use crate::sparse::{identify_system, IdentifyConfig, LassoConfig, Stage3Fit};
use crate::stability::{stability_gate_with, StabilityConfig, StabilityProfile};
use crate::symmetry::{detect_all_with_tau, SymmetryReport, GALILEAN_TAU};
use crate::weak::{make_test_grid, WeakAssembler, WeakSystem, STAGE3_CENTERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Symmetry,
    Stability,
    Baseline,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Symmetry => "symmetry",
            Mode::Stability => "stability",
            Mode::Baseline => "baseline",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub galilean_tau: f64,
    pub gamma_symmetry: f64,
    pub gamma_stability: f64,
    /// Stage-3 test-function centers `(time, space)` per trajectory.
    pub stage3_centers: (usize, usize),
    /// Full library: the baseline fit, the stability gate's starting point and
    /// the index set of the reported coefficients.
    pub base_library: LibrarySpec,
    pub lasso: LassoConfig,
    pub identify: IdentifyConfig,
    pub stability: StabilityConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            galilean_tau: GALILEAN_TAU,
            gamma_symmetry: 1.5,
            gamma_stability: 1.2,
            stage3_centers: STAGE3_CENTERS,
            base_library: LibrarySpec::standard(),
            lasso: LassoConfig::default(),
            identify: IdentifyConfig::default(),
            stability: StabilityConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn gamma(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Symmetry => self.gamma_symmetry,
            Mode::Stability => self.gamma_stability,
            Mode::Baseline => f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_symmetry > 0.0 && self.gamma_stability > 0.0 && self.galilean_tau >= 0.0) {
            return Err(Error::InvalidArgument("gamma must be positive and tau non-negative".into()));
        }
        self.lasso.validate()?;
        self.identify.validate()?;
        self.stability.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentificationResult {
    /// Coefficients over the base library (the ten standard terms by default).
    pub coeffs: CoefficientVector,
    pub mode: Mode,
    pub fallback_triggered: bool,
    /// Library of the reported coefficients (the base one after a fallback).
    pub library_used: LibrarySpec,
    /// Size of the reduced library, counted before any fallback.
    pub library_size: usize,
    /// Absent for the baseline, which skips detection.
    pub symmetry_report: Option<SymmetryReport>,
    /// `‖r_reduced‖² / ‖r_standard‖²` on the shared Stage-3 rows; null when undefined.
    #[serde(with = "crate::serde_ext::finite_or_null")]
    pub residual_ratio: f64,
    pub lambda_star: f64,
    pub stability_profile: Option<StabilityProfile>,
    /// Why the reduced path was abandoned, when it failed outright.
    pub diagnostic: Option<String>,
}

impl IdentificationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Ratio of squared residuals; `0/0` counts as 1 and `x/0` as infinite.
pub fn residual_ratio(reduced: f64, standard: f64) -> f64 {
    if standard > 0.0 {
        reduced / standard
    } else if reduced > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Strict comparison: a ratio equal to `gamma` keeps the reduced result.
pub fn fallback_fires(ratio: f64, gamma: f64) -> bool {
    ratio > gamma
}

struct Reduced {
    library: LibrarySpec,
    fit: Stage3Fit,
    system: WeakSystem,
    profile: Option<StabilityProfile>,
}

fn reduced_path(
    assembler: &WeakAssembler,
    full: &WeakSystem,
    report: &SymmetryReport,
    mode: Mode,
    seed: u64,
    config: &PipelineConfig,
) -> Result<Reduced> {
    let odd = report.reflection_odd.detected;
    let (library, profile) = match mode {
        Mode::Symmetry => {
            let g = galilean_reduced();
            (if odd { odd_reflection_prune(&g) } else { g }, None)
        }
        _ => {
            let base = &config.base_library;
            let base = if odd { odd_reflection_prune(base) } else { base.clone() };
            let (lib, profile) = stability_gate_with(assembler, &base, seed, &config.stability)?;
            (lib, Some(profile))
        }
    };
    let system = full.restrict(&library)?;
    let fit = identify_system(&system, &config.lasso, &config.identify, seed)?;
    Ok(Reduced {
        library,
        fit,
        system,
        profile,
    })
}

/// Full pipeline together with the baseline fit it computes along the way.
pub fn run_eqod_with_baseline(
    set: &TrajectorySet,
    seed: u64,
    config: &PipelineConfig,
) -> Result<(IdentificationResult, IdentificationResult)> {
    config.validate()?;
    let assembler = WeakAssembler::new(set)?;
    let report = detect_all_with_tau(set, config.galilean_tau);
    let mode = if report.galilean.detected { Mode::Symmetry } else { Mode::Stability };

    let (nt, nx) = config.stage3_centers;
    let tg = make_test_grid(assembler.grid(), nt, nx)?;
    let standard = config.base_library.clone();
    let full = assembler.assemble(&standard, &tg)?;
    let std_fit = identify_system(&full, &config.lasso, &config.identify, seed)?;
    let std_res = full.residual_sq(&std_fit.coeffs.values());

    let baseline = IdentificationResult {
        coeffs: std_fit.coeffs.over(standard.terms()),
        mode: Mode::Baseline,
        fallback_triggered: false,
        library_used: standard.clone(),
        library_size: standard.len(),
        symmetry_report: None,
        residual_ratio: 1.0,
        lambda_star: std_fit.lambda_star,
        stability_profile: None,
        diagnostic: None,
    };

    let result = match reduced_path(&assembler, &full, &report, mode, seed, config) {
        Ok(red) => {
            let ratio = residual_ratio(red.system.residual_sq(&red.fit.coeffs.values()), std_res);
            let fired = fallback_fires(ratio, config.gamma(mode));
            let (coeffs, library_used, lambda_star) = if fired {
                (std_fit.coeffs.over(standard.terms()), standard.clone(), std_fit.lambda_star)
            } else {
                (red.fit.coeffs.over(standard.terms()), red.library.clone(), red.fit.lambda_star)
            };
            IdentificationResult {
                coeffs,
                mode,
                fallback_triggered: fired,
                library_used,
                library_size: red.library.len(),
                symmetry_report: Some(report),
                residual_ratio: ratio,
                lambda_star,
                stability_profile: red.profile,
                diagnostic: None,
            }
        }
        Err(e) => IdentificationResult {
            coeffs: std_fit.coeffs.over(standard.terms()),
            mode,
            fallback_triggered: true,
            library_used: standard.clone(),
            library_size: standard.len(),
            symmetry_report: Some(report),
            residual_ratio: f64::NAN,
            lambda_star: std_fit.lambda_star,
            stability_profile: None,
            diagnostic: Some(format!("reduced path failed: {e}")),
        },
    };
    Ok((result, baseline))
}

pub fn run_eqod(set: &TrajectorySet, seed: u64, config: &PipelineConfig) -> Result<IdentificationResult> {
    Ok(run_eqod_with_baseline(set, seed, config)?.0)
}

/// Stage 3 alone on the base library.
pub fn run_wf_lasso_baseline(set: &TrajectorySet, seed: u64, config: &PipelineConfig) -> Result<IdentificationResult> {
    config.validate()?;
    let assembler = WeakAssembler::new(set)?;
    let (nt, nx) = config.stage3_centers;
    let tg = make_test_grid(assembler.grid(), nt, nx)?;
    let standard = config.base_library.clone();
    let full = assembler.assemble(&standard, &tg)?;
    let fit = identify_system(&full, &config.lasso, &config.identify, seed)?;
    Ok(IdentificationResult {
        coeffs: fit.coeffs.over(standard.terms()),
        mode: Mode::Baseline,
        fallback_triggered: false,
        library_used: standard.clone(),
        library_size: standard.len(),
        symmetry_report: None,
        residual_ratio: 1.0,
        lambda_star: fit.lambda_star,
        stability_profile: None,
        diagnostic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_edge_cases() {
        assert_eq!(residual_ratio(2.0, 1.0), 2.0);
        assert_eq!(residual_ratio(0.0, 0.0), 1.0);
        assert!(residual_ratio(1.0, 0.0).is_infinite());
    }

    #[test]
    fn fallback_is_strict() {
        assert!(!fallback_fires(1.5, 1.5));
        assert!(fallback_fires(1.5 + 1e-12, 1.5));
        assert!(!fallback_fires(1.2, 1.2));
        assert!(fallback_fires(f64::INFINITY, 1.2));
        assert!(!fallback_fires(f64::NAN, 1.2));
    }

    #[test]
    fn mode_serializes_lowercase() {
        assert_eq!(serde_json::to_string(&Mode::Symmetry).unwrap(), "\"symmetry\"");
        assert_eq!(Mode::Stability.to_string(), "stability");
    }
}
