//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by parsing, differentiation, geometry and density operators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed expression source; `position` is a byte offset into the input.
    Syntax { position: usize, token: String },
    /// Number of coordinate expressions does not match the declared output dimension.
    Arity { expected: usize, found: usize },
    /// Expression references a variable index outside `1..=k`.
    UnknownVariable { index: usize, max: usize },
    /// Evaluation left the definition set (log of nonpositive, division by zero, ...).
    Domain(String),
    /// Derivative requested at a point where it does not exist (abs at 0).
    NondifferentiablePoint(String),
    /// Matrix or point dimensions inconsistent with the operation.
    Dimension(String),
    /// Newton or quadrature iteration failed to converge.
    Convergence(String),
    /// Level-set extraction asked for a fiber dimension outside {1, 2}.
    UnsupportedCodimension { fiber_dim: usize },
    /// Jacobian rank below what the operator requires.
    RankDeficient(String),
    /// Matrix expected to be symmetric is not.
    NotSymmetric,
    /// Matrix expected positive semi-definite has a significantly negative eigenvalue.
    NotPsd { eigenvalue: f64 },
    /// Linear system has no solution within tolerance.
    SingularSystem,
    /// Query point does not lie on the carrier subspace/manifold.
    OffCarrier { residual: f64 },
    /// Adaptive quadrature error estimate exceeded its budget.
    QuadratureFailure { estimate: f64 },
    /// Order-statistic index outside `1..=k`.
    Index { i: usize, k: usize },
    /// Permutation sum requested for k too large (factorial blowup).
    FactorialOverflow { k: usize },
    /// Result exceeds f64 range; a log-scale variant exists.
    Overflow(String),
    /// Invalid CLI/job configuration.
    Config(String),
    /// Sample batch and grid dimensions disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// Underlying I/O failure (CSV/JSON export).
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { position, token } => {
                write!(f, "syntax error at byte {position}: unexpected `{token}`")
            }
            Error::Arity { expected, found } => {
                write!(f, "expected {expected} coordinate expressions, found {found}")
            }
            Error::UnknownVariable { index, max } => {
                write!(f, "variable x{index} out of range (map has {max} inputs)")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NondifferentiablePoint(msg) => write!(f, "not differentiable: {msg}"),
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Convergence(msg) => write!(f, "convergence failure: {msg}"),
            Error::UnsupportedCodimension { fiber_dim } => {
                write!(f, "unsupported fiber dimension {fiber_dim} (supported: 1, 2)")
            }
            Error::RankDeficient(msg) => write!(f, "rank deficient: {msg}"),
            Error::NotSymmetric => write!(f, "matrix is not symmetric"),
            Error::NotPsd { eigenvalue } => {
                write!(f, "matrix is not positive semi-definite (eigenvalue {eigenvalue:e})")
            }
            Error::SingularSystem => write!(f, "linear system has no solution"),
            Error::OffCarrier { residual } => {
                write!(f, "point is off the carrier subspace (residual {residual:e})")
            }
            Error::QuadratureFailure { estimate } => {
                write!(f, "quadrature error estimate {estimate:e} above budget")
            }
            Error::Index { i, k } => write!(f, "order-statistic index {i} out of 1..={k}"),
            Error::FactorialOverflow { k } => {
                write!(f, "permutation sum limited to k <= 8, got k = {k}")
            }
            Error::Overflow(msg) => write!(f, "overflow: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
