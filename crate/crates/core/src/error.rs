use thiserror::Error;

/// Errors raised by kquad operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spectrum exhausted: requested {requested} eigenvalues, only {available} available")]
    SpectrumExhausted { requested: usize, available: usize },

    #[error("not summable: polynomial decay exponent {exponent} must exceed 1")]
    NotSummable { exponent: f64 },

    #[error(
        "degrees-of-freedom tail not controllable at lambda={lambda}: \
         tail bracket width {gap:e} after {terms} terms exceeds tolerance"
    )]
    TailUncontrolled { lambda: f64, terms: usize, gap: f64 },

    #[error("enumeration budget exceeded: reached {reached} entries (budget {budget})")]
    EnumerationBudget { reached: usize, budget: usize },

    #[error("unsupported Bernoulli polynomial order {order}; supported orders are 2, 4, 6, 8")]
    UnsupportedOrder { order: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{name}={value} outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported mean-embedding combination without fallback grid: {0}")]
    UnsupportedEmbedding(String),

    #[error(
        "matrix not positive definite after jitter escalation up to {jitter:e} \
         (trace {trace:e}); condition is too poor for a stable solve"
    )]
    NotPositiveDefinite { jitter: f64, trace: f64 },

    #[error("singular system at lambda=0 beyond jitter budget {jitter:e}; use lambda > 0")]
    SingularSystem { jitter: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("non-positive error {value} at position {index}; apply an error floor before fitting")]
    NonPositiveError { index: usize, value: f64 },

    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than numerical failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Unknown { .. }
                | Error::InvalidArgument(_)
                | Error::OutOfDomain { .. }
                | Error::UnsupportedOrder { .. }
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedEmbedding(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
