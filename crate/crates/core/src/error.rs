use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("truncation too small: discarded tail weight {tail:e} exceeds {tolerance:e}")]
    TruncationTail { tail: f64, tolerance: f64 },

    #[error("creation operator overflow: top level holds population {population:e} (limit {tolerance:e})")]
    CreationOverflow { population: f64, tolerance: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("operator exceeds the identity (largest eigenvalue {max_eigenvalue})")]
    OperatorAboveIdentity { max_eigenvalue: f64 },

    #[error("amplitude {amplitude:e} at level {level} lies outside span{{|0>,|1>,|2>}}")]
    SubspaceViolation { level: usize, amplitude: f64 },

    #[error("mode {mode} out of range for a {modes}-mode state")]
    InvalidMode { mode: usize, modes: usize },

    #[error("occupation exceeds the total photon cutoff {cutoff}")]
    CutoffExceeded { cutoff: usize },

    #[error("solver did not converge (residual {residual:e})")]
    SolverDidNotConverge { residual: f64 },

    #[error("quadrature grid misses probability mass {deficit:e}")]
    GridMassDeficit { deficit: f64 },

    #[error("no samples to process")]
    EmptyData,

    #[error("POVM completeness violated by {residual:e}")]
    IncompletePovm { residual: f64 },

    #[error("data phase {theta} has no matching POVM phase")]
    PhaseMismatch { theta: f64 },
}
