//! Benchmark trajectory generation: the eight 1D periodic PDEs, their
//! initial-condition families, spectral time integration and additive noise.

pub mod etdrk4;
pub mod rhs;
pub mod rk45;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{CoefficientVector, Grid1D, LibraryTerm, Trajectory, TrajectorySet};
use crate::error::{Error, Result};
use crate::rng::{RngStream, NOISE_SEED_OFFSET};
use crate::spectral::SpectralWorkspace;

use self::etdrk4::EtdCoefficients;
use self::rhs::SpectralRhs;
use self::rk45::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pde {
    Heat,
    Burgers,
    Kdv,
    FisherKpp,
    AdvDiff,
    Ks,
    KdvBurgers,
    ReactDiff,
}

impl Pde {
    pub const ALL: [Pde; 8] = [
        Pde::Heat,
        Pde::Burgers,
        Pde::Kdv,
        Pde::FisherKpp,
        Pde::AdvDiff,
        Pde::Ks,
        Pde::KdvBurgers,
        Pde::ReactDiff,
    ];

    /// Command-line / file identifier.
    pub fn id(&self) -> &'static str {
        match self {
            Pde::Heat => "heat",
            Pde::Burgers => "burgers",
            Pde::Kdv => "kdv",
            Pde::FisherKpp => "fisher-kpp",
            Pde::AdvDiff => "adv-diff",
            Pde::Ks => "ks",
            Pde::KdvBurgers => "kdv-burgers",
            Pde::ReactDiff => "react-diff",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Pde::Heat => "Heat",
            Pde::Burgers => "Burgers",
            Pde::Kdv => "KdV",
            Pde::FisherKpp => "Fisher-KPP",
            Pde::AdvDiff => "Adv-Diff",
            Pde::Ks => "KS",
            Pde::KdvBurgers => "KdV-Burgers",
            Pde::ReactDiff => "React-Diff",
        }
    }

    /// Right-hand side coefficients of `u_t = ...`.
    pub fn true_terms(&self) -> Vec<(LibraryTerm, f64)> {
        use LibraryTerm as T;
        match self {
            Pde::Heat => vec![(T::UXX, 0.1)],
            Pde::Burgers => vec![(T::UXX, 0.1), (T::U_UX, -1.0)],
            Pde::Kdv => vec![(T::UXXX, -1.0), (T::U_UX, -1.0)],
            Pde::FisherKpp => vec![(T::U, 1.0), (T::U2, -1.0), (T::UXX, 0.01)],
            Pde::AdvDiff => vec![(T::UX, -1.0), (T::UXX, 0.05)],
            Pde::Ks => vec![(T::UXX, -1.0), (T::UXXXX, -1.0), (T::U_UX, -1.0)],
            Pde::KdvBurgers => vec![(T::UXX, 0.05), (T::UXXX, -1.0), (T::U_UX, -1.0)],
            Pde::ReactDiff => vec![(T::U, 1.0), (T::U3, -1.0), (T::UXX, 0.1)],
        }
    }

    /// Whether the equation admits the Galilean boost.
    pub fn is_galilean(&self) -> bool {
        matches!(self, Pde::Burgers | Pde::Kdv | Pde::Ks | Pde::KdvBurgers)
    }

    pub fn domain_length(&self) -> f64 {
        match self {
            Pde::Ks => 32.0 * PI,
            _ => 2.0 * PI,
        }
    }
}

impl fmt::Display for Pde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for Pde {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', ' '], "-").replace("--", "-");
        Pde::ALL
            .into_iter()
            .find(|p| p.id() == norm || p.display_name().to_ascii_lowercase() == norm)
            .ok_or_else(|| Error::UnknownPde(s.to_string()))
    }
}

/// A benchmark PDE with its integration window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeSpec {
    pub pde: Pde,
    pub domain_length: f64,
    /// Length of the recorded time window.
    pub t_end: f64,
    /// Simulated time discarded before the recorded window starts.
    pub transient: f64,
    pub stiff: bool,
    /// Zero-pad nonlinear products to remove aliasing.
    pub dealias: bool,
    /// Fixed step count over the recorded window for the stiff integrator.
    pub etd_steps: usize,
}

impl PdeSpec {
    pub fn new(pde: Pde) -> Self {
        let (t_end, transient) = match pde {
            Pde::Heat => (1.0, 0.0),
            Pde::Burgers => (1.0, 0.0),
            Pde::Kdv => (0.05, 0.0),
            Pde::FisherKpp => (2.0, 0.0),
            Pde::AdvDiff => (1.0, 0.0),
            Pde::Ks => (60.0, 20.0),
            Pde::KdvBurgers => (0.05, 0.0),
            Pde::ReactDiff => (2.0, 0.0),
        };
        PdeSpec {
            pde,
            domain_length: pde.domain_length(),
            t_end,
            transient,
            stiff: pde == Pde::Ks,
            dealias: true,
            etd_steps: 1000,
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn true_coeffs(&self) -> CoefficientVector {
        CoefficientVector::new(self.pde.true_terms())
            .expect("static coefficient table")
            .over(&LibraryTerm::STANDARD)
    }

    /// The recorded grid for `nx` spatial and `nt` temporal samples.
    pub fn grid(&self, nx: usize, nt: usize) -> Result<Grid1D> {
        Grid1D::new(0.0, self.domain_length, nx, self.transient, self.transient + self.t_end, nt)
    }
}

fn check_grid(spec: &PdeSpec, grid: &Grid1D) -> Result<()> {
    if (grid.length - spec.domain_length).abs() > 1e-12 * spec.domain_length {
        return Err(Error::InvalidArgument(format!(
            "{} requires domain length {}, grid has {}",
            spec.pde, spec.domain_length, grid.length
        )));
    }
    Ok(())
}

/// Samples one initial condition from the family of `spec.pde`.
pub fn initial_condition(spec: &PdeSpec, grid: &Grid1D, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_grid(spec, grid)?;
    let xs = grid.xs();
    let white = |scale: f64, rng: &mut RngStream| -> Vec<f64> { xs.iter().map(|_| scale * rng.standard_normal()).collect() };
    let u = match spec.pde {
        Pde::Heat | Pde::AdvDiff => {
            let a: Vec<f64> = (0..5).map(|_| 0.25 * rng.standard_normal()).collect();
            let b: Vec<f64> = (0..5).map(|_| 0.25 * rng.standard_normal()).collect();
            xs.iter()
                .map(|&x| {
                    (1..=5)
                        .map(|k| {
                            let kx = k as f64 * x;
                            a[k - 1] * kx.sin() + b[k - 1] * kx.cos()
                        })
                        .sum()
                })
                .collect()
        }
        Pde::Burgers | Pde::KdvBurgers => {
            let eps = white(0.03, rng);
            xs.iter().zip(eps).map(|(x, e)| -x.sin() + e).collect()
        }
        Pde::Kdv => {
            let eps = white(0.1, rng);
            xs.iter()
                .zip(eps)
                .map(|(x, e)| 12.0 / (x - PI).cosh().powi(2) + e)
                .collect()
        }
        Pde::FisherKpp => xs.iter().map(|x| 0.5 * (1.0 + (2.0 * (x - PI)).tanh())).collect(),
        Pde::Ks => {
            let eps = white(0.1, rng);
            xs.iter()
                .zip(eps)
                .map(|(x, e)| (x / 16.0).cos() * (1.0 + (x / 16.0).sin()) + e)
                .collect()
        }
        Pde::ReactDiff => {
            let eps = white(0.1, rng);
            xs.iter()
                .zip(eps)
                .map(|(x, e)| 0.5 * x.sin() + 0.3 * (2.0 * x).cos() + e)
                .collect()
        }
    };
    Ok(u)
}

/// Integrates `spec.pde` from `u0` and samples it on the output times of `grid`.
pub fn solve(spec: &PdeSpec, u0: &[f64], grid: &Grid1D) -> Result<Trajectory> {
    check_grid(spec, grid)?;
    if u0.len() != grid.nx {
        return Err(Error::Shape {
            expected: grid.nx.to_string(),
            got: u0.len().to_string(),
        });
    }
    if grid.nx % 2 != 0 {
        return Err(Error::InvalidArgument("nx must be even for the spectral solver".into()));
    }
    let nx = grid.nx;
    let ws = SpectralWorkspace::new(nx, grid.length)?;
    let rhs = SpectralRhs::new(nx, grid.length, &spec.pde.true_terms(), spec.dealias)?;

    let mut c0 = ws.forward(u0);
    let inv_n = 1.0 / nx as f64;
    for v in c0.iter_mut() {
        *v *= inv_n;
    }
    c0[nx / 2] = Complex64::new(0.0, 0.0);

    let t0 = 0.0;
    let outputs: Vec<f64> = (0..grid.nt).map(|i| grid.t(i)).collect();
    let states = if spec.stiff {
        solve_etd(spec, &rhs, c0, t0, &outputs)?
    } else {
        rk45::integrate(|c| rhs.eval(c), c0, t0, &outputs, Tolerances::default())?
    };

    let mut values = Array2::zeros((grid.nt, nx));
    for (i, c) in states.into_iter().enumerate() {
        let mut buf = c;
        // state holds fft/nx, so the raw inverse returns physical values
        ws.inverse_complex(&mut buf);
        for (j, z) in buf.iter().enumerate() {
            values[[i, j]] = z.re * nx as f64;
        }
    }
    if values.iter().any(|v: &f64| !v.is_finite()) {
        return Err(Error::BlowUp { step: 0, time: grid.t_end });
    }
    Trajectory::new(*grid, values)
}

fn solve_etd(spec: &PdeSpec, rhs: &SpectralRhs, c0: Vec<Complex64>, t0: f64, outputs: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let intervals = outputs.len().saturating_sub(1).max(1);
    let window = outputs.last().copied().unwrap_or(t0) - outputs[0];
    let per_interval = spec.etd_steps.div_ceil(intervals).max(1);
    let h = window / (intervals * per_interval) as f64;
    let nonlinear = |c: &[Complex64]| rhs.nonlinear(c);

    let mut step = 0usize;
    let mut v = c0;
    let lead = outputs[0] - t0;
    if lead > 0.0 {
        let n_lead = (lead / h).ceil() as usize;
        let h_lead = lead / n_lead as f64;
        let coeffs = EtdCoefficients::new(rhs.linear(), h_lead);
        v = etdrk4::advance(&coeffs, v, n_lead, h_lead, t0, step, &nonlinear)?;
        step += n_lead;
    }
    let coeffs = EtdCoefficients::new(rhs.linear(), h);
    let mut out = Vec::with_capacity(outputs.len());
    out.push(v.clone());
    for i in 1..outputs.len() {
        v = etdrk4::advance(&coeffs, v, per_interval, h, outputs[i - 1], step, &nonlinear)?;
        step += per_interval;
        out.push(v.clone());
    }
    Ok(out)
}

/// Population standard deviation over all samples.
pub fn population_std(values: &Array2<f64>) -> f64 {
    let n = values.len() as f64;
    let mean = values.sum() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// `U + sigma * std(U) * Z` with `Z` i.i.d. standard normal drawn in row-major order.
pub fn add_noise(traj: &Trajectory, sigma: f64, rng: &mut RngStream) -> Result<Trajectory> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(traj.clone());
    }
    let scale = sigma * population_std(traj.values());
    let mut values = traj.values().clone();
    for v in values.iter_mut() {
        *v += scale * rng.standard_normal();
    }
    Trajectory::new(*traj.grid(), values)
}

/// `m` clean trajectories; initial condition `i` is drawn from substream `(seed, i)`.
pub fn generate_clean_set(spec: &PdeSpec, grid: &Grid1D, m: usize, seed: u64) -> Result<TrajectorySet> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    let trajs: Vec<Trajectory> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::substream(seed, i as u64);
            let u0 = initial_condition(spec, grid, &mut rng)?;
            solve(spec, &u0, grid)
        })
        .collect::<Result<_>>()?;
    TrajectorySet::new(trajs)
}

/// Adds noise to every member; member `i` draws from substream `(seed + 1000, i)`.
pub fn noisy_copy(clean: &TrajectorySet, sigma: f64, seed: u64) -> Result<TrajectorySet> {
    let trajs = clean
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = RngStream::substream(seed.wrapping_add(NOISE_SEED_OFFSET), i as u64);
            add_noise(t, sigma, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(trajs)
}

/// `m` noisy trajectories of `spec.pde` for one seed.
pub fn generate_set(spec: &PdeSpec, grid: &Grid1D, m: usize, sigma: f64, seed: u64) -> Result<TrajectorySet> {
    let clean = generate_clean_set(spec, grid, m, seed)?;
    noisy_copy(&clean, sigma, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn parse_names() {
        assert_eq!("heat".parse::<Pde>().unwrap(), Pde::Heat);
        assert_eq!("KdV-Burgers".parse::<Pde>().unwrap(), Pde::KdvBurgers);
        assert_eq!("fisher_kpp".parse::<Pde>().unwrap(), Pde::FisherKpp);
        assert!(matches!("navier".parse::<Pde>(), Err(Error::UnknownPde(_))));
    }

    #[test]
    fn true_coefficients_match_table() {
        let heat = PdeSpec::new(Pde::Heat).true_coeffs();
        assert_eq!(heat.get(LibraryTerm::UXX), 0.1);
        assert_eq!(heat.values().iter().filter(|v| **v != 0.0).count(), 1);
        let supports: Vec<usize> = Pde::ALL.iter().map(|p| p.true_terms().len()).collect();
        assert_eq!(supports, vec![1, 2, 2, 3, 2, 3, 3, 3]);
        assert!((PdeSpec::new(Pde::Ks).domain_length - 32.0 * PI).abs() < 1e-12);
        assert!(Pde::ALL.iter().filter(|p| **p != Pde::Ks).all(|p| (p.domain_length() - 2.0 * PI).abs() < 1e-15));
    }

    #[test]
    fn fisher_ic_is_deterministic() {
        let spec = PdeSpec::new(Pde::FisherKpp);
        let g = spec.grid(128, 128).unwrap();
        let a = initial_condition(&spec, &g, &mut RngStream::new(1)).unwrap();
        let b = initial_condition(&spec, &g, &mut RngStream::new(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn burgers_ic_seed_difference_is_small() {
        let spec = PdeSpec::new(Pde::Burgers);
        let g = spec.grid(128, 128).unwrap();
        let a = initial_condition(&spec, &g, &mut RngStream::new(1)).unwrap();
        let b = initial_condition(&spec, &g, &mut RngStream::new(2)).unwrap();
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        // difference of two 0.03*N(0,1) draws has std 0.0424; 0.2 is ~4.7 sigma per point
        assert!(d > 0.0 && d < 0.2, "{d}");
    }

    #[test]
    fn kdv_ic_peak() {
        let spec = PdeSpec::new(Pde::Kdv);
        let g = spec.grid(128, 128).unwrap();
        let u = initial_condition(&spec, &g, &mut RngStream::new(5)).unwrap();
        // x = pi sits on grid index 64
        assert!((u[64] - 12.0).abs() < 0.6);
        let xs = g.xs();
        assert_eq!(12.0 / (xs[64] - PI).cosh().powi(2), 12.0);
    }

    #[test]
    fn ic_rejects_wrong_domain() {
        let spec = PdeSpec::new(Pde::Ks);
        let g = Grid1D::new(0.0, 2.0 * PI, 64, 0.0, 1.0, 16).unwrap();
        assert!(initial_condition(&spec, &g, &mut RngStream::new(0)).is_err());
    }

    #[test]
    fn heat_matches_exact_solution() {
        let spec = PdeSpec::new(Pde::Heat);
        let g = spec.grid(128, 64).unwrap();
        let u0: Vec<f64> = g.xs().iter().map(|x| x.sin()).collect();
        let tr = solve(&spec, &u0, &g).unwrap();
        let exact = Trajectory::from_fn(g, |x, t| (-0.1 * t).exp() * x.sin()).unwrap();
        let err = max_abs(&(tr.values() - exact.values()));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn adv_diff_matches_exact_solution() {
        let spec = PdeSpec::new(Pde::AdvDiff);
        let g = spec.grid(128, 64).unwrap();
        let u0: Vec<f64> = g.xs().iter().map(|x| x.sin()).collect();
        let tr = solve(&spec, &u0, &g).unwrap();
        let exact = Trajectory::from_fn(g, |x, t| (-0.05 * t).exp() * (x - t).sin()).unwrap();
        let err = max_abs(&(tr.values() - exact.values()));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn heat_is_dissipative() {
        let spec = PdeSpec::new(Pde::Heat);
        let g = spec.grid(64, 32).unwrap();
        let set = generate_clean_set(&spec, &g, 1, 42).unwrap();
        let v = set.trajectories()[0].values();
        let norms: Vec<f64> = v.rows().into_iter().map(|r| r.dot(&r)).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn heat_spectral_convergence() {
        // a non-band-limited periodic profile exercises the spatial resolution
        let spec = PdeSpec::new(Pde::Heat).with_t_end(0.1);
        let err_at = |nx: usize| {
            let g = spec.grid(nx, 8).unwrap();
            let u0: Vec<f64> = g.xs().iter().map(|x| 1.0 / (1.5 - x.cos())).collect();
            let tr = solve(&spec, &u0, &g).unwrap();
            // exact solution from the Fourier series of 1/(1.5 - cos x): a_n = 2/sqrt(1.25) * r^n
            let r = 1.5 - 1.25f64.sqrt();
            let exact = Trajectory::from_fn(g, |x, t| {
                let mut s = 1.0 / 1.25f64.sqrt();
                for n in 1..200 {
                    let nf = n as f64;
                    s += 2.0 / 1.25f64.sqrt() * r.powi(n) * (nf * x).cos() * (-0.1 * nf * nf * t).exp();
                }
                s
            })
            .unwrap();
            max_abs(&(tr.values() - exact.values()))
        };
        let coarse = err_at(16);
        let fine = err_at(32);
        assert!(fine * 10.0 <= coarse, "{coarse} -> {fine}");
    }

    #[test]
    fn burgers_and_kdv_conserve_mass() {
        for pde in [Pde::Burgers, Pde::Kdv] {
            let spec = PdeSpec::new(pde);
            let g = spec.grid(128, 32).unwrap();
            let set = generate_clean_set(&spec, &g, 1, 42).unwrap();
            let v = set.trajectories()[0].values();
            let mass: Vec<f64> = v.rows().into_iter().map(|r| r.sum() * g.dx()).collect();
            let scale = v.iter().map(|x| x.abs()).sum::<f64>() * g.dx() / g.nt as f64;
            for m in &mass {
                assert!((m - mass[0]).abs() <= 1e-6 * scale, "{pde}: {} vs {}", m, mass[0]);
            }
        }
    }

    #[test]
    fn ks_stays_bounded() {
        let spec = PdeSpec::new(Pde::Ks);
        let g = spec.grid(128, 128).unwrap();
        let set = generate_clean_set(&spec, &g, 1, 42).unwrap();
        let peak = max_abs(set.trajectories()[0].values());
        assert!(peak < 10.0 && peak > 0.1, "{peak}");
    }

    #[test]
    fn noise_contract() {
        let spec = PdeSpec::new(Pde::Heat);
        let g = spec.grid(128, 128).unwrap();
        let clean = generate_clean_set(&spec, &g, 1, 42).unwrap();
        let t = &clean.trajectories()[0];
        let same = add_noise(t, 0.0, &mut RngStream::new(7)).unwrap();
        assert_eq!(same.values(), t.values());

        let noisy = add_noise(t, 0.1, &mut RngStream::new(7)).unwrap();
        let diff = noisy.values() - t.values();
        let ratio = population_std(&diff) / population_std(t.values());
        assert!((0.095..=0.105).contains(&ratio), "{ratio}");

        let again = add_noise(t, 0.1, &mut RngStream::new(7)).unwrap();
        assert_eq!(again.values(), noisy.values());
        assert!(add_noise(t, -0.1, &mut RngStream::new(7)).is_err());
    }

    #[test]
    fn generate_set_determinism() {
        let spec = PdeSpec::new(Pde::Heat);
        let g = spec.grid(64, 32).unwrap();
        let a = generate_set(&spec, &g, 3, 0.0, 42).unwrap();
        let b = generate_set(&spec, &g, 3, 0.0, 42).unwrap();
        let c = generate_set(&spec, &g, 3, 0.0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let t = a.trajectories();
        assert_ne!(t[0].values(), t[1].values());
        assert_ne!(t[1].values(), t[2].values());
    }
}
