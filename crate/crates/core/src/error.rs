use thiserror::Error;

/// Errors produced by the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or tensor dimension does not match the expected shape.
    #[error("shape mismatch at mode {mode}: expected {expected}, got {got}")]
    ShapeMismatch {
        mode: usize,
        expected: usize,
        got: usize,
    },
    /// Tensor shapes disagree entirely (element counts or orders).
    #[error("incompatible shapes: {0}")]
    IncompatibleShapes(String),
    /// A contraction was requested with no holes; use `multilinear_form`.
    #[error("mode assignment has no holes; use multilinear_form for full contraction")]
    NoHoles,
    /// More than two holes in a partial contraction.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Non-finite input where finite values are required.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// An iterative method did not converge within its cap.
    #[error("convergence failure after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },
    /// A construction or enumeration would exceed its budget cap.
    #[error("budget exceeded: {needed} required, cap is {cap}; {hint}")]
    Budget {
        needed: u128,
        cap: u128,
        hint: String,
    },
    /// A composition lemma hypothesis is violated.
    #[error("lemma hypothesis violated: {0}")]
    LemmaHypothesis(String),
    /// An invalid parameter value.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A tensor fails the symmetry requirement.
    #[error("tensor is not symmetric (max deviation {max_deviation:.3e} exceeds {tolerance:.3e})")]
    NotSymmetric { max_deviation: f64, tolerance: f64 },
    /// All candidates degenerated to zero vectors.
    #[error("degenerate: {0}")]
    Degenerate(String),
    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(String),
    /// A text artifact could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// Underlying I/O failure, carried as text to keep the error cloneable.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
