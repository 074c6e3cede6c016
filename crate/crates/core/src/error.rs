//! Error type shared by the crate; each variant maps to a process exit code.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("tabulated weight queried at radius {radius} beyond table end {max}")]
    Extrapolation { radius: f64, max: f64 },
    #[error("sup not attained inside cached range (argmax at depth {depth}); raise the depth")]
    Truncation { depth: usize },
    #[error("sequence has depth {depth}, index {index} requested")]
    Depth { depth: usize, index: usize },
    #[error("no finite (C, lambda) fits the sampled pairs: {0}")]
    NotModerate(String),
    #[error("generator is singular (|det| = {det:e})")]
    SingularGenerator { det: f64 },
    #[error("enumeration would visit about {estimate} points (cap {cap})")]
    TooManyPoints { estimate: f64, cap: usize },
    #[error("dimension {dim} exceeds the exhaustive search cap {cap}")]
    Unsupported { dim: usize, cap: usize },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("source support is not inside a fundamental region: {0}")]
    Support(String),
    #[error("quadrature did not converge (achieved {achieved:e}, asked {requested:e})")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("no lattice points in the cone between radii {r_min} and {r_max}")]
    EmptyCone { r_min: f64, r_max: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("U ∩ Λ* ≠ {{0}}: dual vector {witness:?} has norm {norm} < {rho}")]
    Separation { witness: Vec<f64>, norm: f64, rho: f64 },
    #[error("point {point:?} is outside the analysis domain")]
    Domain { point: Vec<f64> },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Invalid(_) | Error::SingularGenerator { .. } | Error::Io(_) => 2,
            Error::Separation { .. } => 3,
            Error::EmptyCone { .. }
            | Error::InsufficientData(_)
            | Error::Domain { .. }
            | Error::Support(_)
            | Error::Geometry(_)
            | Error::Unsupported { .. }
            | Error::TooManyPoints { .. }
            | Error::NotModerate(_) => 4,
            Error::Extrapolation { .. }
            | Error::Truncation { .. }
            | Error::Depth { .. }
            | Error::Quadrature { .. } => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
