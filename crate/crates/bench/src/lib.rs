//! Fixtures shared by the criterion benches.

use eqod_core::solvers::{generate_set, Pde, PdeSpec};
use eqod_core::TrajectorySet;

/// `m` trajectories of `pde` on an `n × n` grid at noise level `sigma`, seed 42.
pub fn fixture(pde: Pde, n: usize, m: usize, sigma: f64) -> TrajectorySet {
    let spec = PdeSpec::new(pde);
    let grid = spec.grid(n, n).expect("benchmark grid");
    generate_set(&spec, &grid, m, sigma, 42).expect("benchmark data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let set = fixture(Pde::Heat, 32, 2, 0.05);
        assert_eq!(set.len(), 2);
        assert_eq!((set.grid().nx, set.grid().nt), (32, 32));
    }
}
