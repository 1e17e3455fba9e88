use thiserror::Error;

/// Errors surfaced by model construction and the numeric engines.
///
/// The CLI maps these onto process exit codes: invalid configuration input
/// exits 2, model preconditions and numeric failures exit 3, resource budget
/// overruns exit 4.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("singular support at {witness}: null mass {null_mass}, alternative mass {alt_mass}")]
    SingularSupport {
        witness: String,
        null_mass: f64,
        alt_mass: f64,
    },

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("correct-exponent assumptions fail: {witness}")]
    AssumptionsFailed { witness: String },

    #[error("argument {x} lies outside the attainable interval [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("constraint set is infeasible: {0}")]
    Infeasible(String),

    #[error("operation not supported for this model: {0}")]
    Unsupported(String),

    #[error("resource budget exceeded: {0}")]
    ResourceBudget(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::ResourceBudget(_) => 4,
            _ => 3,
        }
    }
}
