//! Quantum and classical entropy dynamics of two nonlinearly coupled quartic
//! oscillators.
//!
//! The quantum side propagates a joint wavefunction with a split-operator
//! scheme and diagonalizes the reduced density matrix of the `x` degree of
//! freedom. The classical side propagates a swarm of trajectories sampled from
//! the interference-free part of the initial Wigner function and box-counts
//! it on the quantum grid's `(x, p_x)` lattice.

pub mod error;
pub mod grid;
pub mod cdyn;
pub mod centropy;
pub mod model;
pub mod qdyn;
pub mod rdm;
pub mod runner;
pub mod states;

pub use error::{Error, Result};
