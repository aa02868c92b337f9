use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |M_jk - conj(M_kj)| = {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("positivity violated: eigenvalue {eigenvalue:.3e} below -{tolerance:.1e}")]
    PositivityViolation { eigenvalue: f64, tolerance: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("ambiguous spectrum: cluster of width {width:.3e} exceeds 10 x grouping tolerance {tol:.3e}")]
    AmbiguousSpectrum { width: f64, tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectrum too dense for the secular approximation: {0}")]
    SpectrumTooDense(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolverConfig(String),

    #[error("integration failed at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("steady state is not unique: null space dimension {null_dim}")]
    NonUniqueSteadyState { null_dim: usize },

    #[error("bath index {index} out of range ({count} baths)")]
    BadBathIndex { index: usize, count: usize },

    #[error("dimension {dim} exceeds the dense superoperator limit {limit}")]
    TooLarge { dim: usize, limit: usize },
}
