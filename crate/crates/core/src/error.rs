use thiserror::Error;

/// Errors raised by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotPositiveDefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not Hermitian (max anti-Hermitian part {0:e})")]
    NotHermitian(f64),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("both scattering potentials vanish; pair mixing coefficient undefined")]
    DegenerateCoupling,

    #[error("UnstableHamiltonian: quadrature block {block} is not positive definite (smallest eigenvalue {min_eigenvalue:e}); pump exceeds parametric stability bound")]
    UnstableHamiltonian { block: &'static str, min_eigenvalue: f64 },

    #[error("too many modes for partition enumeration: {0} (maximum 12)")]
    TooManyModes(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid two-qubit state: eigenvalue {0:e} below -1e-9")]
    InvalidState(f64),

    #[error("stationary state is not unique: null space dimension {0}")]
    NonUniqueStationaryState(usize),

    #[error("cutoff not converged: EOF changed by {relative_change:.3e} (tolerance {tolerance:.3e}) between n_ph={n_ph} and n_ph={n_ph_check}")]
    CutoffNotConverged {
        n_ph: usize,
        n_ph_check: usize,
        relative_change: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
