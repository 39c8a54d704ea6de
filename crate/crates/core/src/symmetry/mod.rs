//! Data-driven symmetry detectors and their combined report.

pub mod galilean;
pub mod reflection;
pub mod scaling;
pub mod symbol;
pub mod temporal;
pub mod translation;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Trajectory, TrajectorySet};

pub use galilean::{detect_galilean, galilean_evidence, GalileanEvidence, GALILEAN_BASIS, GALILEAN_TAU};
pub use reflection::{detect_reflection, ReflectionOutcome, REFLECTION_THRESHOLD};
pub use scaling::{detect_scaling, ScalingOutcome, SCALING_R2_THRESHOLD};
pub use symbol::{estimate_symbol, estimate_symbol_window, SymbolEstimate};
pub use temporal::{detect_temporal_translation, TemporalOutcome, TEMPORAL_THRESHOLD};
pub use translation::{detect_spatial_translation, translation_score, TRANSLATION_THRESHOLD};

/// One detector outcome. A detector that failed reports `detected = false`
/// and a NaN score, written as `null` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub detected: bool,
    #[serde(with = "crate::serde_ext::finite_or_null")]
    pub score: f64,
}

impl Detection {
    pub fn new(detected: bool, score: f64) -> Self {
        Detection { detected, score }
    }

    pub fn failed() -> Self {
        Detection {
            detected: false,
            score: f64::NAN,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.score.is_nan()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub spatial_translation: Detection,
    pub temporal_translation: Detection,
    /// Score is the convective energy fraction.
    pub galilean: Detection,
    /// Score is the log-log R².
    pub scaling: Detection,
    pub reflection_even: Detection,
    pub reflection_odd: Detection,
}

impl SymmetryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct PerTrajectory {
    spatial: Detection,
    temporal: Detection,
    scaling: Detection,
    even: Detection,
    odd: Detection,
}

fn per_trajectory(traj: &Trajectory) -> PerTrajectory {
    let spatial = detect_spatial_translation(traj).map_or(Detection::failed(), |(d, s)| Detection::new(d, s));
    let temporal = detect_temporal_translation(traj).map_or(Detection::failed(), |o| Detection::new(o.detected, o.score));
    let scaling = detect_scaling(traj).map_or(Detection::failed(), |o| Detection::new(o.detected, o.r_squared));
    let (even, odd) = match detect_reflection(traj) {
        Ok(o) => (Detection::new(o.even, o.even_score), Detection::new(o.odd, o.odd_score)),
        Err(_) => (Detection::failed(), Detection::failed()),
    };
    PerTrajectory {
        spatial,
        temporal,
        scaling,
        even,
        odd,
    }
}

/// Conservative combination: detected only if every trajectory detects, and
/// the reported score is the least favourable one. Any failure fails the whole test.
fn combine(items: impl Iterator<Item = Detection>, higher_is_better: bool) -> Detection {
    let mut out: Option<Detection> = None;
    for d in items {
        if d.is_failed() {
            return Detection::failed();
        }
        out = Some(match out {
            None => d,
            Some(acc) => {
                let worse = if higher_is_better { acc.score.min(d.score) } else { acc.score.max(d.score) };
                Detection::new(acc.detected && d.detected, worse)
            }
        });
    }
    out.unwrap_or_else(Detection::failed)
}

pub fn detect_all(set: &TrajectorySet) -> SymmetryReport {
    detect_all_with_tau(set, GALILEAN_TAU)
}

pub fn detect_all_with_tau(set: &TrajectorySet, tau: f64) -> SymmetryReport {
    let (galilean, per): (Detection, Vec<PerTrajectory>) = rayon::join(
        || match galilean_evidence(set) {
            Ok(e) => Detection::new(e.detected(tau), e.energy_fraction),
            Err(_) => Detection::failed(),
        },
        || set.trajectories().par_iter().map(per_trajectory).collect(),
    );
    SymmetryReport {
        spatial_translation: combine(per.iter().map(|p| p.spatial), false),
        temporal_translation: combine(per.iter().map(|p| p.temporal), false),
        galilean,
        scaling: combine(per.iter().map(|p| p.scaling), true),
        reflection_even: combine(per.iter().map(|p| p.even), false),
        reflection_odd: combine(per.iter().map(|p| p.odd), false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_score_serializes_as_null() {
        let d = Detection::failed();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"detected":false,"score":null}"#);
        let back: Detection = serde_json::from_str(&s).unwrap();
        assert!(back.is_failed() && !back.detected);
    }

    #[test]
    fn combine_is_conservative() {
        let a = Detection::new(true, 0.01);
        let b = Detection::new(false, 0.2);
        let c = combine([a, b].into_iter(), false);
        assert!(!c.detected);
        assert_eq!(c.score, 0.2);
        let r = combine([Detection::new(true, 0.95), Detection::new(true, 0.92)].into_iter(), true);
        assert!(r.detected);
        assert_eq!(r.score, 0.92);
        assert!(combine([a, Detection::failed()].into_iter(), false).is_failed());
    }
}
