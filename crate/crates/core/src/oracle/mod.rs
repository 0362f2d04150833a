//! Brute-force spectral ground truth: lattice discretization of the
//! magnetic Schrödinger operator with Peierls link phases, eigenvalue
//! counting by dense diagonalization or LDL^T inertia, and psi-weighted
//! local traces.

mod assemble;
mod count;
mod skyline;

pub use assemble::{assemble, Boundary, DiscreteHamiltonian, Hop, Lattice};
pub use count::{cluster_eigenvalues, count_below, local_trace, Cluster, CountMethod, CountResult};
pub use skyline::SkylineMatrix;

/// Largest N for which the dense eigendecomposition path is allowed by
/// default. Above it only inertia counting is available.
pub const DENSE_BUDGET_DEFAULT: usize = 8192;
