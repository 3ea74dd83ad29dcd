use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown series `{name}` (available: {available})")]
    UnknownSeries { name: String, available: String },

    #[error("{0} check(s) failed")]
    CheckFailure(usize),

    #[error("cannot read report {path}: {reason}")]
    BadReport { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical error in {check}: {source}")]
    Numerical {
        check: String,
        #[source]
        source: specinv_core::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownSeries { .. } | CliError::BadReport { .. } => 2,
            _ => 1,
        }
    }
}
