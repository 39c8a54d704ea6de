//! Benchmark harness: the PDE × noise × seed grid, the Galilean threshold
//! sweep and the ablations, with CSV and SVG output.

pub mod ablation;
pub mod svg;
pub mod sweep;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{CoefficientVector, SupportSet, TrajectorySet};
use crate::error::{Error, Result};
use crate::library::expanded_library;
use crate::metrics::{coefficient_error, f1_score, support_from_coeffs, SUPPORT_THRESHOLD};
use crate::pipeline::{run_eqod_with_baseline, run_wf_lasso_baseline, IdentificationResult, PipelineConfig};
use crate::solvers::{generate_clean_set, noisy_copy, Pde, PdeSpec};
use crate::stability::StabilityProfile;

pub use ablation::{run_ablation, AblationKind, AblationParams, AblationRow};
pub use sweep::{run_threshold_sweep, SweepCase, SweepRow, SWEEP_NEGATIVES, SWEEP_POSITIVES};

pub const NOISE_LEVELS: [f64; 4] = [0.0, 0.05, 0.10, 0.20];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eqod,
    WfLasso,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Eqod, Method::WfLasso];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Eqod => "eqod",
            Method::WfLasso => "wf_lasso",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "eqod" => Ok(Method::Eqod),
            "wf_lasso" | "wflasso" => Ok(Method::WfLasso),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}; expected eqod or wf-lasso"))),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (42..52).collect()
}

fn default_m() -> usize {
    3
}

fn default_n() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub pdes: Vec<Pde>,
    pub noise_levels: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n")]
    pub nx: usize,
    #[serde(default = "default_n")]
    pub nt: usize,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

impl Default for BenchmarkPlan {
    fn default() -> Self {
        BenchmarkPlan {
            pdes: Pde::ALL.to_vec(),
            noise_levels: NOISE_LEVELS.to_vec(),
            seeds: default_seeds(),
            m: 3,
            nx: 128,
            nt: 128,
            methods: all_methods(),
        }
    }
}

impl BenchmarkPlan {
    pub fn validate(&self) -> Result<()> {
        if self.pdes.is_empty() || self.noise_levels.is_empty() || self.seeds.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidArgument("plan lists must be nonempty".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("plan needs m >= 1".into()));
        }
        if let Some(s) = self.noise_levels.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid noise level {s}")));
        }
        Ok(())
    }

    fn cases(&self) -> Vec<TrialSpec> {
        let mut out = Vec::new();
        for &pde in &self.pdes {
            for &noise in &self.noise_levels {
                for &seed in &self.seeds {
                    out.push(TrialSpec {
                        pde,
                        noise,
                        seed,
                        m: self.m,
                        nx: self.nx,
                        nt: self.nt,
                        library_size: 10,
                    });
                }
            }
        }
        out
    }
}

/// One (pde, noise, seed) data condition; every requested method runs on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub pde: Pde,
    pub noise: f64,
    pub seed: u64,
    pub m: usize,
    pub nx: usize,
    pub nt: usize,
    /// Size of the base library (10 is the standard one).
    pub library_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub pde: Pde,
    pub noise: f64,
    pub seed: u64,
    pub method: Method,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub ce: f64,
    pub mode: String,
    pub fallback: bool,
    pub library_size: usize,
    pub residual_ratio: f64,
    pub error: String,
    #[serde(skip)]
    pub coeffs: Option<CoefficientVector>,
    #[serde(skip)]
    pub stability_profile: Option<StabilityProfile>,
    #[serde(skip)]
    pub m: usize,
    #[serde(skip)]
    pub nx: usize,
    #[serde(skip)]
    pub base_library_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub pde: Pde,
    pub noise: f64,
    pub method: Method,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub ce_mean: f64,
    pub mean_lib: f64,
    pub fallback_count: usize,
    #[serde(skip)]
    pub trials: usize,
    #[serde(skip)]
    pub mode_histogram: BTreeMap<String, usize>,
}

/// Sample mean and sample standard deviation (`n - 1`); a single value has std 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn truth_support(pde: Pde) -> SupportSet {
    pde.true_terms().into_iter().map(|(t, _)| t).collect()
}

fn scored(trial: &TrialSpec, method: Method, res: Result<IdentificationResult>) -> TrialResult {
    let mut out = TrialResult {
        pde: trial.pde,
        noise: trial.noise,
        seed: trial.seed,
        method,
        f1: 0.0,
        precision: 0.0,
        recall: 0.0,
        ce: f64::NAN,
        mode: String::new(),
        fallback: false,
        library_size: 0,
        residual_ratio: f64::NAN,
        error: String::new(),
        coeffs: None,
        stability_profile: None,
        m: trial.m,
        nx: trial.nx,
        base_library_size: trial.library_size,
    };
    match res {
        Ok(r) => {
            let score = f1_score(&support_from_coeffs(&r.coeffs, SUPPORT_THRESHOLD), &truth_support(trial.pde))
                .expect("benchmark truths are nonempty");
            out.f1 = score.f1;
            out.precision = score.precision;
            out.recall = score.recall;
            out.ce = coefficient_error(&r.coeffs, &PdeSpec::new(trial.pde).true_coeffs());
            out.mode = r.mode.to_string();
            out.fallback = r.fallback_triggered;
            out.library_size = r.library_size;
            out.residual_ratio = r.residual_ratio;
            out.stability_profile = r.stability_profile;
            out.coeffs = Some(r.coeffs);
        }
        Err(e) => out.error = e.to_string(),
    }
    out
}

fn run_methods(set: &TrajectorySet, trial: &TrialSpec, methods: &[Method], config: &PipelineConfig) -> Vec<TrialResult> {
    let mut cfg = config.clone();
    if trial.library_size != cfg.base_library.len() {
        match expanded_library(trial.library_size) {
            Ok(lib) => cfg.base_library = lib,
            Err(e) => {
                let msg = e.to_string();
                return methods
                    .iter()
                    .map(|&m| scored(trial, m, Err(Error::InvalidArgument(msg.clone()))))
                    .collect();
            }
        }
    }
    let want_eqod = methods.contains(&Method::Eqod);
    let want_wf = methods.contains(&Method::WfLasso);
    let mut out = Vec::new();
    if want_eqod {
        match run_eqod_with_baseline(set, trial.seed, &cfg) {
            Ok((e, w)) => {
                out.push(scored(trial, Method::Eqod, Ok(e)));
                if want_wf {
                    out.push(scored(trial, Method::WfLasso, Ok(w)));
                }
            }
            Err(err) => {
                let msg = err.to_string();
                out.push(scored(trial, Method::Eqod, Err(Error::Solver(msg))));
                if want_wf {
                    out.push(scored(trial, Method::WfLasso, run_wf_lasso_baseline(set, trial.seed, &cfg)));
                }
            }
        }
    } else if want_wf {
        out.push(scored(trial, Method::WfLasso, run_wf_lasso_baseline(set, trial.seed, &cfg)));
    }
    out
}

type DataKey = (Pde, u64, usize, usize, usize);

/// Runs every trial; clean data is generated once per (pde, seed, m, nx, nt)
/// and noisy copies are drawn from the noise substream of the same seed.
pub fn run_trials(trials: &[TrialSpec], methods: &[Method], config: &PipelineConfig) -> Vec<TrialResult> {
    let mut keys: Vec<DataKey> = trials.iter().map(|t| (t.pde, t.seed, t.m, t.nx, t.nt)).collect();
    keys.sort_by(|a, b| (a.0.id(), a.1, a.2, a.3, a.4).cmp(&(b.0.id(), b.1, b.2, b.3, b.4)));
    keys.dedup();
    let clean: HashMap<DataKey, std::result::Result<TrajectorySet, String>> = keys
        .par_iter()
        .map(|&k| {
            let spec = PdeSpec::new(k.0);
            let set = spec
                .grid(k.3, k.4)
                .and_then(|g| generate_clean_set(&spec, &g, k.2, k.1))
                .map_err(|e| e.to_string());
            (k, set)
        })
        .collect();
    let mut results: Vec<TrialResult> = trials
        .par_iter()
        .flat_map_iter(|t| {
            let data = clean[&(t.pde, t.seed, t.m, t.nx, t.nt)]
                .as_ref()
                .map_err(|e| Error::Solver(e.clone()))
                .and_then(|c| noisy_copy(c, t.noise, t.seed));
            match data {
                Ok(set) => run_methods(&set, t, methods, config),
                Err(e) => {
                    let msg = e.to_string();
                    methods
                        .iter()
                        .map(|&m| scored(t, m, Err(Error::Solver(msg.clone()))))
                        .collect()
                }
            }
        })
        .collect();
    results.sort_by(|a, b| trial_order(a).partial_cmp(&trial_order(b)).expect("finite keys"));
    results
}

fn trial_order(t: &TrialResult) -> (usize, f64, usize, usize, usize, Method, u64) {
    let p = Pde::ALL.iter().position(|&p| p == t.pde).unwrap_or(usize::MAX);
    (p, t.noise, t.base_library_size, t.m, t.nx, t.method, t.seed)
}

/// Per-cell statistics over the trials sharing (pde, noise, method).
pub fn aggregate(trials: &[TrialResult]) -> Vec<CellResult> {
    let mut groups: Vec<((Pde, f64, Method), Vec<&TrialResult>)> = Vec::new();
    for t in trials {
        let key = (t.pde, t.noise, t.method);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(t),
            None => groups.push((key, vec![t])),
        }
    }
    groups
        .into_iter()
        .map(|((pde, noise, method), ts)| {
            let f1: Vec<f64> = ts.iter().map(|t| t.f1).collect();
            let (f1_mean, f1_std) = mean_std(&f1);
            let ce: Vec<f64> = ts.iter().map(|t| t.ce).filter(|c| c.is_finite()).collect();
            let ce_mean = if ce.is_empty() { f64::NAN } else { ce.iter().sum::<f64>() / ce.len() as f64 };
            let ok: Vec<&&TrialResult> = ts.iter().filter(|t| t.error.is_empty()).collect();
            let mean_lib = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|t| t.library_size as f64).sum::<f64>() / ok.len() as f64
            };
            let mut mode_histogram = BTreeMap::new();
            for t in &ok {
                *mode_histogram.entry(t.mode.clone()).or_insert(0) += 1;
            }
            CellResult {
                pde,
                noise,
                method,
                f1_mean,
                f1_std,
                ce_mean,
                mean_lib,
                fallback_count: ts.iter().filter(|t| t.fallback).count(),
                trials: ts.len(),
                mode_histogram,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub trials: Vec<TrialResult>,
    pub cells: Vec<CellResult>,
}

pub fn run_benchmark(plan: &BenchmarkPlan, config: &PipelineConfig) -> Result<BenchmarkOutput> {
    plan.validate()?;
    let trials = run_trials(&plan.cases(), &plan.methods, config);
    let cells = aggregate(&trials);
    Ok(BenchmarkOutput { trials, cells })
}

/// Serializes rows with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Debug, Deserialize)]
struct TrialRow {
    pde: Pde,
    noise: f64,
    seed: u64,
    method: Method,
    f1: f64,
    precision: f64,
    recall: f64,
    ce: f64,
    mode: String,
    fallback: bool,
    library_size: usize,
    residual_ratio: f64,
    error: String,
}

/// Reads the per-trial CSV back; the inverse of `to_csv(&trials)` for the
/// serialized columns.
pub fn trials_from_csv(text: &str) -> Result<Vec<TrialResult>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize::<TrialRow>() {
        let row = row.map_err(|e| Error::Format(e.to_string()))?;
        out.push(TrialResult {
            pde: row.pde,
            noise: row.noise,
            seed: row.seed,
            method: row.method,
            f1: row.f1,
            precision: row.precision,
            recall: row.recall,
            ce: row.ce,
            mode: row.mode,
            fallback: row.fallback,
            library_size: row.library_size,
            residual_ratio: row.residual_ratio,
            error: row.error,
            coeffs: None,
            stability_profile: None,
            m: 0,
            nx: 0,
            base_library_size: 10,
        });
    }
    Ok(out)
}

/// F1 against noise for one PDE, one line per method.
pub fn f1_vs_noise_svg(cells: &[CellResult], pde: Pde) -> String {
    let mut series = Vec::new();
    for method in Method::ALL {
        let mut pts: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.pde == pde && c.method == method)
            .map(|c| (c.noise, c.f1_mean))
            .collect();
        if pts.is_empty() {
            continue;
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite noise"));
        series.push((method.to_string(), pts));
    }
    svg::line_chart(&format!("{}: F1 vs noise", pde.display_name()), "noise level", "F1", &series)
}

pub fn stability_profile_svg(profile: &StabilityProfile, title: &str, threshold: f64) -> String {
    let bars: Vec<(String, f64)> = profile.terms.iter().zip(&profile.pi).map(|(t, &p)| (t.tag(), p)).collect();
    svg::bar_chart(title, "selection probability", &bars, Some(threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        assert_eq!(mean_std(&[1.0]), (1.0, 0.0));
        let (m, s) = mean_std(&[1.0, 0.0]);
        assert_eq!(m, 0.5);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn method_names() {
        assert_eq!("wf-lasso".parse::<Method>().unwrap(), Method::WfLasso);
        assert_eq!("EqOD".parse::<Method>().unwrap(), Method::Eqod);
        assert!("sindy".parse::<Method>().is_err());
        assert_eq!(serde_json::to_string(&Method::WfLasso).unwrap(), "\"wf_lasso\"");
    }

    #[test]
    fn plan_defaults_from_partial_json() {
        let p: BenchmarkPlan = serde_json::from_str(r#"{"pdes": ["heat"], "noise_levels": [0.1]}"#).unwrap();
        assert_eq!(p.seeds, (42..52).collect::<Vec<_>>());
        assert_eq!((p.m, p.nx, p.nt), (3, 128, 128));
        assert_eq!(p.methods, Method::ALL.to_vec());
        assert!(BenchmarkPlan { seeds: vec![], ..p }.validate().is_err());
    }
}
