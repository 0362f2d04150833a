//! Shared fixtures for the criterion benches.

use magweyl::geometry::{registry, Scenario};
use magweyl::oracle::{assemble, Boundary, DiscreteHamiltonian, Lattice};

/// Flux-quantized 2D torus at the given flux quanta and resolution.
pub fn landau_torus(n_phi: usize, n: usize) -> (Scenario, DiscreteHamiltonian, f64, f64) {
    let scenario = registry("const2d").expect("registry");
    let mu = 4.0;
    let h = mu / (2.0 * std::f64::consts::PI * n_phi as f64);
    let lattice = Lattice::new(&scenario, &[n, n], Boundary::Periodic).expect("lattice");
    let ham = assemble(&scenario, mu, h, &lattice).expect("assemble");
    (scenario, ham, mu, h)
}
