//! Numerical laboratory for eigenvalue counting of multidimensional
//! magnetic Schrödinger operators: magnetic Weyl counting densities,
//! Landau levels, resonance partitions, non-degeneracy condition checkers,
//! the constant-coefficient canonical form, and a lattice eigenvalue oracle
//! to verify them against at desk scale.

pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod reduction;
pub mod resonance;
pub mod weyl;

pub use error::{Error, Result};

pub use nalgebra;
