use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("degrees of freedom must be positive, got {0}")]
    InvalidDegreesOfFreedom(f64),

    #[error("{what} requires n >= {min}, got n = {n}")]
    SampleSize {
        what: &'static str,
        n: usize,
        min: usize,
    },

    #[error("dimension p must be at least 2, got {0}")]
    Dimension(usize),

    #[error("data has {len} values, which is not {n} rows x {p} columns")]
    Shape { len: usize, n: usize, p: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("column {column} has zero sample variance")]
    DegenerateColumn { column: usize },

    #[error("sample correlation between columns {i} and {j} is +-1; {what} is infinite")]
    DegenerateCorrelation {
        what: &'static str,
        i: usize,
        j: usize,
    },

    #[error("rho = {rho} outside the positive-definite range (-1/(p-1), 1) for p = {p}")]
    InvalidRho { rho: f64, p: usize },

    #[error("replications must be at least 1")]
    NoReplications,

    #[error("{0}")]
    Domain(String),

    #[error("unknown test `{0}` (expected one of t_star, T_star, t_c, T_c)")]
    UnknownTest(String),

    #[error("{0} did not converge")]
    Convergence(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
