//! State-vector simulation and VQE benchmarking for the transverse-field
//! Ising model on periodic hypercubic lattices.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: lattice geometry, bonds and antipodal pairs.
//! - [`statevector`]: the dense amplitude kernel and Pauli strings.
//! - [`hamiltonian`]: Pauli sums, energies, variances and exact
//!   diagonalization (dense and Lanczos).
//! - [`ansatz`]: HEA, HVA, HVA-SB and real-amplitude circuits with adjoint
//!   gradients.
//! - [`optimizer`]: L-BFGS and COBYLA.
//! - [`vqe`]: the variational driver and field sweeps.
//! - [`observables`]: magnetization, correlations and entanglement entropy.
//! - [`expressivity`]: fidelity sampling and frame potentials.

pub mod ansatz;
pub mod error;
pub mod expressivity;
pub mod hamiltonian;
pub mod lattice;
pub mod observables;
pub mod optimizer;
pub mod statevector;
pub mod vqe;

/// Version of this crate, recorded in run outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use lattice::LatticeSpec;
pub use statevector::{Complex, Gate, GateKind, Pauli, PauliString, StateVector};
