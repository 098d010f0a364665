use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("point {x} lies outside the interval [{a}, {b}]")]
    Domain { x: f64, a: f64, b: f64 },

    #[error("invalid interval: left endpoint {a} must be smaller than right endpoint {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is singular (zero pivot in column {column})")]
    Singular { column: usize },

    #[error(
        "system matrix is singular; the sufficient condition κ₁‖D̃₂‖ + κ₂‖D̃₁‖ < μ reads {lhs:.6e} < {mu:.6e}"
    )]
    SingularSystem { lhs: f64, mu: f64 },

    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(&'static str),

    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("initial datum violates the homogeneous boundary conditions: g(a) = {left:e}, g(b) = {right:e}")]
    BoundaryViolation { left: f64, right: f64 },

    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
