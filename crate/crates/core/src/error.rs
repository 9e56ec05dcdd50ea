use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter values or mismatched dimensions.
    #[error("configuration error at `{field}`: {message}")]
    Config { field: String, message: String },

    /// An argument outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Training sequences cannot satisfy the orthogonality conditions.
    #[error("infeasible training: pilot length {tau} < K_d + N_t = {required}")]
    InfeasibleTraining { tau: usize, required: usize },

    /// A channel column with zero norm was handed to a normalizing beamformer.
    #[error("degenerate channel: column {column} has zero norm")]
    DegenerateChannel { column: usize },

    /// Optimization problem has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Linear solve, factorization or quadrature failure.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::InfeasibleTraining { .. } => 2,
            Error::Infeasible(_) => 3,
            Error::Numerical(_) | Error::DegenerateChannel { .. } => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
