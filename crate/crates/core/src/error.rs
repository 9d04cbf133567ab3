use thiserror::Error;

/// Errors raised by the capacity library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NonSquare(usize, usize),

    #[error("matrix is not Hermitian (max |A - A^dagger| = {0:e})")]
    NonHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("Gram matrix diagonal deviates from 1 by {0:e}")]
    NonUnitDiagonal(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry buffer has {got} elements, expected {expected}")]
    BadShape { expected: usize, got: usize },

    #[error("eigensolver did not converge")]
    EigenFailure,

    #[error("invalid density matrix {index}: {reason}")]
    InvalidState { index: usize, reason: String },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("Gram matrix (1-a)I + aJ is not PSD for n = {n}, a = {a}")]
    GramNotPsd { n: usize, a: f64 },

    #[error("omega = {omega} exceeds (n-1)/n = {limit} for n = {n}")]
    OmegaOutOfRange { n: usize, omega: f64, limit: f64 },

    #[error("Fock cutoff {cutoff} leaves tail mass {tail:e} (> 1e-12)")]
    CutoffTooSmall { cutoff: usize, tail: f64 },

    #[error("overlap membership is only defined for pure ensembles (state {0} is mixed)")]
    MixedStateOverlapCheck(usize),

    #[error("missing context: {0}")]
    MissingContext(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("state has zero weight on the projector")]
    ZeroProjection,

    #[error("assumption kind mismatch: expected {expected}, got {got}")]
    KindMismatch { expected: String, got: String },

    #[error("assumption has no scalar parameter to average: {0}")]
    NonScalarParameter(String),

    #[error("invalid shared-randomness strategy: {0}")]
    InvalidStrategy(String),

    #[error("discrimination oracle did not converge (certificate gap {gap:e})")]
    OracleNotConverged { gap: f64 },

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
