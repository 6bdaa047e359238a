use thiserror::Error;

/// Errors raised by the interpolation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}, {z}) is not on the unit sphere (norm {norm})")]
    NotOnSphere { x: f64, y: f64, z: f64, norm: f64 },

    #[error("argument {0} outside [-1, 1]")]
    LegendreDomain(f64),

    #[error("shape parameter must be finite and positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypergeometric series did not converge within {terms} terms (mu = {mu}, epsilon = {epsilon})")]
    SeriesNonconvergence { mu: usize, epsilon: f64, terms: usize },

    #[error("truncation tolerance not met below degree {cap} (epsilon = {epsilon})")]
    TruncationCap { cap: usize, epsilon: f64 },

    #[error("interpolation matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("node set is not unisolvent for the leading vector harmonics (diagonal ratio {ratio:e})")]
    NotUnisolvent { ratio: f64 },

    #[error("linear system is singular")]
    Singular,

    #[error("reference values are identically zero; relative error undefined")]
    DegenerateTruth,

    #[error("unknown target field `{0}`")]
    UnknownTarget(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
