//! Crate-wide error type.

/// Errors produced by the solvers, the data pipeline and the experiment
/// runners. The CLI maps these onto process exit codes, see
/// [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear solver failed{}: {detail}", step_suffix(.step))]
    Solver { step: Option<usize>, detail: String },

    #[error("solution diverged (non-finite values) at time step {step}")]
    Divergence { step: usize },

    #[error("observation data inadmissible: min value {min:.6e} below required {required:.6e}")]
    Inadmissible { min: f64, required: f64 },

    #[error("fixed-point iteration {iteration} failed: {source}")]
    Reconstruction {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn step_suffix(step: &Option<usize>) -> String {
    match step {
        Some(n) => format!(" at time step {n}"),
        None => String::new(),
    }
}

impl Error {
    /// Process exit code: 0 success, 2 invalid config, 3 inadmissible data,
    /// 4 solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::InvalidInput(_)
            | Error::OutOfRange(_)
            | Error::InvalidCoefficient(_)
            | Error::Config(_)
            | Error::DimensionMismatch(_) => 2,
            Error::Inadmissible { .. } => 3,
            Error::Solver { .. } | Error::Divergence { .. } | Error::Reconstruction { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
