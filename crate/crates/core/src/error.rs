//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("operator is not Hermitian: max asymmetry |M[{row},{col}] - conj(M[{col},{row}])| = {asymmetry:.3e} exceeds {tol:.3e}")]
    NotHermitian {
        row: usize,
        col: usize,
        asymmetry: f64,
        tol: f64,
    },

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("state norm {norm} deviates from 1 by more than {tol}")]
    NormViolation { norm: f64, tol: f64 },

    #[error("step size underflow at t = {t}: required step {step:.3e} below minimum {min_step:.3e}")]
    StepSizeUnderflow { t: f64, step: f64, min_step: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonance condition violated: {0} (drive must be well detuned from one-photon resonance)")]
    ResonanceViolation(String),

    #[error("Fock truncation too small: {0}")]
    TruncationOverflow(String),

    #[error("eigensolver failed to converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("propagation grid must be strictly increasing")]
    NonMonotonicGrid,
}

pub type Result<T> = std::result::Result<T, Error>;
