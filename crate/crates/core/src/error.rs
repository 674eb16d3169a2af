use thiserror::Error;

/// Failure modes of the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no interior minimum of the gap between levels {pair:?} on the grid")]
    CrossingNotFound { pair: (usize, usize) },

    #[error("cannot build generator: {0}")]
    Construction(String),

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("propagation failed at t = {time}: {reason}")]
    PropagationFailure { time: f64, reason: String },

    #[error("density matrix violates a physical constraint: {0}")]
    InvalidState(String),

    #[error("correlation has not decayed: |C(tau_max)|/C(0) = {ratio:e} exceeds {limit:e}")]
    WindowTooShort { ratio: f64, limit: f64 },

    #[error("eigendecomposition did not converge")]
    Eigen,
}

impl Error {
    /// True for errors that signal a violated numerical contract (positivity, trace).
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::PropagationFailure { .. } | Error::InvalidState(_) | Error::NotHermitian { .. }
        )
    }

    /// True for convergence and integration-window failures.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::WindowTooShort { .. }
                | Error::CrossingNotFound { .. }
                | Error::DegenerateSteadyState(_)
                | Error::Eigen
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
