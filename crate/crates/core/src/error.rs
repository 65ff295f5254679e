use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("photon number {n} is out of range for truncation dimension {dim}")]
    OutOfRange { n: usize, dim: usize },

    #[error("truncation inadequate: {0}")]
    TruncationInadequate(String),

    #[error("expected a {expected}-mode state, got {got} modes")]
    ModeCount { expected: usize, got: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unphysical moments: symplectic eigenvalue {0} < 1/2")]
    UnphysicalMoments(f64),

    #[error("inconsistent environment: entropy {entropy} exceeds g(N_E) = {max} for N_E = {mean_photon}")]
    InconsistentEnvironment { mean_photon: f64, entropy: f64, max: f64 },

    #[error("inconsistent distribution: {0}")]
    InconsistentDistribution(String),

    #[error("quadrature covers only {captured} of the noise mass (need {required})")]
    Coverage { captured: f64, required: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
