use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unbalanced panel: unit {unit} has no observation at time {time}")]
    UnbalancedPanel { unit: String, time: i64 },

    #[error("duplicate observation for unit {unit} at time {time}")]
    DuplicateCell { unit: String, time: i64 },

    #[error("non-finite value in column {column} for unit {unit} at time {time}")]
    NonFiniteValue {
        unit: String,
        time: i64,
        column: String,
    },

    #[error("panel too small: {0}")]
    TooSmall(String),

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error(
        "singular pooled design: min eigenvalue {min_eigenvalue:e} vs max {max_eigenvalue:e} \
         (too few periods for the basis, or collinear regressors)"
    )]
    SingularDesign {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("singular design for unit {label} (index {unit})")]
    SingularUnit { unit: usize, label: String },

    #[error("HAC window {window} must be smaller than the number of periods {periods}")]
    WindowTooLarge { window: usize, periods: usize },

    #[error("Sigma_v estimate is not invertible")]
    SingularSigmaV,

    #[error("sieve basis has no nonlinear columns to test")]
    NoNonlinearColumns,

    #[error("not enough residual degrees of freedom: {0}")]
    InsufficientDegreesOfFreedom(String),

    #[error("series too short: {len} observations, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("{skipped} of {total} replications failed (limit is 1%)")]
    TooManySkipped { skipped: usize, total: usize },
}

impl Error {
    /// True for failures of the numerical procedures (as opposed to bad input data or
    /// configuration). The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularDesign { .. }
                | Error::SingularUnit { .. }
                | Error::SingularSigmaV
                | Error::InsufficientDegreesOfFreedom(_)
                | Error::DegenerateRegression(_)
                | Error::TooManySkipped { .. }
        )
    }
}
