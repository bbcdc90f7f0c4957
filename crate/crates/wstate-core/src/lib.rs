//! Numerical toolkit for an itinerant Rydberg-dressed excitation coupled to
//! dispersionless trap bosons on a one-dimensional atom array.
//!
//! The crate provides
//!
//! - closed-form model parameters and the sweet-spot relations ([`params`]),
//! - the nonlinear displacement-dependent on-site energy and hopping together
//!   with their linearization ([`realspace`]),
//! - one-excitation / truncated-boson bases and total-quasimomentum sectors
//!   ([`hilbert`]),
//! - matrix-free Hermitian action of the coupled Hamiltonian ([`hamiltonian`]),
//! - a Lanczos extremal eigensolver with a dense oracle ([`eigensolver`]),
//! - coupling-strength sweeps with level-crossing detection ([`scan`]),
//! - full time evolution of the Rabi-type twisted-W preparation drive
//!   ([`protocol`]).
//!
//! Energies are stored as angular frequencies (E/hbar, rad/s) throughout;
//! lengths are in micrometers.

pub mod eigensolver;
pub mod hamiltonian;
pub mod hilbert;
pub mod linalg;
pub mod params;
pub mod protocol;
pub mod realspace;
pub mod scan;

pub use num_complex::Complex64;
