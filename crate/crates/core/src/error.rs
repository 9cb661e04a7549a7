use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("configuration count overflows 64-bit addressing: {0}")]
    Overflow(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("address {address} outside [1, {dim}]")]
    AddressOutOfRange { address: u64, dim: u64 },

    #[error("orbital {orbital} outside [1, {orbitals}]")]
    OrbitalOutOfRange { orbital: usize, orbitals: usize },

    #[error("incompatible spaces: {0}")]
    SpaceMismatch(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("dense oracle is capped at {cap} configurations, space has {dim}")]
    TooLarge { dim: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("Lanczos did not converge after {matvecs} matvecs (best residual {residual:e})")]
    NoConvergence { matvecs: usize, residual: f64 },

    #[error("propagation step failed at t = {time}: error estimate {estimate:e} above tolerance at dt = {dt:e}")]
    StepFailure { time: f64, dt: f64, estimate: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
