//! Command implementations behind the `eqod` binary and the EQT1 container.

pub mod eqt;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eqod_core::harness::{
    f1_vs_noise_svg, run_ablation, run_benchmark, run_threshold_sweep, stability_profile_svg, to_csv,
    AblationKind, AblationParams, BenchmarkPlan, Method,
};
use eqod_core::pipeline::{run_eqod, run_wf_lasso_baseline, PipelineConfig};
use eqod_core::solvers::{generate_set, Pde, PdeSpec};
use eqod_core::stability::StabilityConfig;
use eqod_core::symmetry::detect_all;
use eqod_core::Error;

use crate::eqt::{EqtContainer, EqtHeader};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_BAD_ARGS: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_UNREADABLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "eqod", version, about = "Symmetry-aware weak-form identification of 1D evolution PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a benchmark PDE and write an EQT1 container.
    Generate(GenerateArgs),
    /// Run the symmetry detectors on a container.
    Detect {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Identify the governing equation of a container.
    Identify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "eqod")]
        method: Method,
        #[arg(long)]
        seed: u64,
    },
    /// Run the benchmark grid and write CSV and SVG results.
    Bench {
        /// JSON plan; the full default grid when omitted.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
    },
    /// Galilean detection quality over a range of thresholds.
    SweepTau {
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1,0.2,0.5")]
        taus: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "42,43,44,45,46")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "sweep_out")]
        out: PathBuf,
    },
    /// Trajectory-count, resolution or library-size ablation.
    Ablate {
        #[arg(long)]
        kind: AblationKind,
        /// Defaults to 42..=51 (42..=46 for library scaling).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long, default_value = "ablation_out")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub pde: Pde,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    #[arg(long, default_value_t = 128)]
    pub nt: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: u64,
    /// Overrides the default final time of the PDE.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
    #[serde(skip)]
    pub code: i32,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        let error = match code {
            EXIT_BAD_ARGS => "bad_arguments",
            EXIT_BLOW_UP => "solver_blow_up",
            EXIT_UNREADABLE => "unreadable_container",
            _ => "failure",
        };
        CliError {
            error: error.to_string(),
            message: message.into(),
            code,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }

    fn from_core(e: Error) -> Self {
        let code = match e {
            Error::BlowUp { .. } | Error::NonFinite(_) => EXIT_BLOW_UP,
            Error::InvalidArgument(_)
            | Error::InvalidGrid(_)
            | Error::UnknownPde(_)
            | Error::UnknownTerm(_)
            | Error::TestGridTooSmall { .. } => EXIT_BAD_ARGS,
            _ => EXIT_FAILURE,
        };
        CliError::new(code, e.to_string())
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display()))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Serialize)]
struct GenerateSummary {
    path: String,
    pde: Pde,
    x0: f64,
    length: f64,
    nx: usize,
    t_start: f64,
    t_end: f64,
    nt: usize,
    m: usize,
    sigma: f64,
    seed: u64,
    checksum: String,
}

fn read_container(path: &Path) -> CliResult<EqtContainer> {
    EqtContainer::read(path).map_err(|e| CliError::new(EXIT_UNREADABLE, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn json_line(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

pub fn generate(args: &GenerateArgs) -> CliResult<String> {
    if !(args.sigma.is_finite() && args.sigma >= 0.0) {
        return Err(CliError::new(EXIT_BAD_ARGS, format!("sigma must be >= 0, got {}", args.sigma)));
    }
    if args.m == 0 {
        return Err(CliError::new(EXIT_BAD_ARGS, "m must be >= 1"));
    }
    let mut spec = PdeSpec::new(args.pde);
    if let Some(t) = args.t_end {
        spec = spec.with_t_end(t);
    }
    let grid = spec.grid(args.nx, args.nt).map_err(CliError::from_core)?;
    let set = generate_set(&spec, &grid, args.m, args.sigma, args.seed).map_err(CliError::from_core)?;
    let header = EqtHeader::new(args.pde, &grid, args.m, args.sigma, args.seed);
    let container = EqtContainer::new(header, set).map_err(CliError::from_core)?;
    container.write(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let summary = GenerateSummary {
        path: args.out.display().to_string(),
        pde: args.pde,
        x0: grid.x0,
        length: grid.length,
        nx: grid.nx,
        t_start: grid.t_start,
        t_end: grid.t_end,
        nt: grid.nt,
        m: args.m,
        sigma: args.sigma,
        seed: args.seed,
        checksum: container.checksum(),
    };
    Ok(json_line(&summary))
}

pub fn detect(input: &Path) -> CliResult<String> {
    let c = read_container(input)?;
    let report = detect_all(&c.set);
    Ok(json_line(&report))
}

pub fn identify(input: &Path, method: Method, seed: u64) -> CliResult<String> {
    let c = read_container(input)?;
    let cfg = PipelineConfig::default();
    let res = match method {
        Method::Eqod => run_eqod(&c.set, seed, &cfg),
        Method::WfLasso => run_wf_lasso_baseline(&c.set, seed, &cfg),
    }
    .map_err(CliError::from_core)?;
    Ok(json_line(&res))
}

fn create_dir(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn csv(rows: &[impl Serialize]) -> CliResult<String> {
    to_csv(rows).map_err(CliError::from_core)
}

pub fn bench(plan: Option<&Path>, out: &Path) -> CliResult<String> {
    let plan = match plan {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::new(EXIT_BAD_ARGS, format!("{}: {e}", p.display())))?;
            serde_json::from_str::<BenchmarkPlan>(&text)
                .map_err(|e| CliError::new(EXIT_BAD_ARGS, format!("{}: {e}", p.display())))?
        }
        None => BenchmarkPlan::default(),
    };
    plan.validate().map_err(CliError::from_core)?;
    let result = run_benchmark(&plan, &PipelineConfig::default()).map_err(CliError::from_core)?;
    create_dir(out)?;
    write_file(&out.join("trials.csv"), &csv(&result.trials)?)?;
    let cells = csv(&result.cells)?;
    write_file(&out.join("cells.csv"), &cells)?;
    for &pde in &plan.pdes {
        write_file(&out.join(format!("f1_vs_noise_{}.svg", pde.id())), &f1_vs_noise_svg(&result.cells, pde))?;
    }
    let first_seed = plan.seeds[0];
    let pi = StabilityConfig::default().pi_threshold;
    for t in &result.trials {
        if t.method != Method::Eqod || t.seed != first_seed {
            continue;
        }
        if let Some(profile) = &t.stability_profile {
            let stem = format!("stability_{}_{}", t.pde.id(), t.noise);
            write_file(&out.join(format!("{stem}.csv")), &profile.to_csv())?;
            let title = format!("{} at noise {}: selection probabilities", t.pde.display_name(), t.noise);
            write_file(&out.join(format!("{stem}.svg")), &stability_profile_svg(profile, &title, pi))?;
        }
    }
    Ok(cells)
}

pub fn sweep_tau(taus: &[f64], seeds: &[u64], out: &Path) -> CliResult<String> {
    let (cases, rows) = run_threshold_sweep(taus, seeds).map_err(|e| CliError::new(EXIT_BAD_ARGS, e.to_string()))?;
    create_dir(out)?;
    write_file(&out.join("sweep_cases.csv"), &csv(&cases)?)?;
    let table = csv(&rows)?;
    write_file(&out.join("sweep.csv"), &table)?;
    Ok(table)
}

pub fn ablate(kind: AblationKind, seeds: Option<Vec<u64>>, values: Option<Vec<usize>>, out: &Path) -> CliResult<String> {
    let mut params = AblationParams::defaults(kind);
    if let Some(s) = seeds {
        params.seeds = s;
    }
    params.values = values;
    let rows = run_ablation(kind, &params, &PipelineConfig::default()).map_err(CliError::from_core)?;
    create_dir(out)?;
    let table = csv(&rows)?;
    write_file(&out.join(format!("ablation_{kind}.csv")), &table)?;
    Ok(table)
}

pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Generate(args) => generate(&args),
        Command::Detect { input } => detect(&input),
        Command::Identify { input, method, seed } => identify(&input, method, seed),
        Command::Bench { plan, out } => bench(plan.as_deref(), &out),
        Command::SweepTau { taus, seeds, out } => sweep_tau(&taus, &seeds, &out),
        Command::Ablate {
            kind,
            seeds,
            values,
            out,
        } => ablate(kind, seeds, values, &out),
    }
}
