//! Closed-system quantum dynamics for STIRAP-family control protocols in
//! superconducting three-level architectures: Lambda-system transfer with
//! always-on drives, circuit-QED photon injection and Fock pumping, and
//! dynamical detection of ultrastrong atom-cavity coupling.
//!
//! All frequencies are angular (hbar = 1); each protocol declares its own
//! frequency unit and times are measured in its inverse.

pub mod cavity;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod lambda;
mod linalg;
pub mod operator;
pub mod pulse;
pub mod report;
pub mod usc;

pub use error::{Error, Result};
pub use hilbert::{Basis, BasisLabel, QuantumState};
pub use operator::{HermitianOperator, TimeDependentHamiltonian};
