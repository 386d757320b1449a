use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension n = {n}: {reason}")]
    UnsupportedDimension { n: usize, reason: &'static str },

    #[error("quadrature did not converge (estimate {estimate:e}, error bound {error_bound:e})")]
    QuadratureFailure { estimate: f64, error_bound: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid diffusion set: {0}")]
    InvalidDiffusionSet(String),

    #[error("Gram matrix is not numerically positive-definite (pivot {index} = {pivot:e})")]
    SingularGram { index: usize, pivot: f64 },

    #[error("the Green basis is not contained in H^{m} for n = {n}; use the regularized basis")]
    GreenBasisNotInSpace { n: usize, m: u32 },

    #[error("not enough diffusion constants: need more than {required}, got {found}")]
    InsufficientDiffusions { required: usize, found: usize },

    #[error("duplicate Cauchy nodes at indices {0} and {1}")]
    DuplicateNodes(usize, usize),

    #[error("kernel has no {0} profile")]
    MissingProfile(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
