use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Model(#[from] vidpop::Error),

    #[error("replay produced different output for {0}")]
    ReplayMismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use vidpop::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::MissingParameter(_) => "missing_parameter",
            CliError::Parse { .. } => "parse",
            CliError::Io { .. } => "io",
            CliError::ReplayMismatch(_) => "replay_mismatch",
            CliError::Model(e) => match e {
                E::InvalidParameter { .. } => "invalid_parameter",
                E::InvalidGrid(_) => "invalid_grid",
                E::Overflow { .. } => "overflow",
                E::GridTooCoarse { .. } => "grid_too_coarse",
                E::HorizonTooShort { .. } => "horizon_too_short",
                E::DegenerateTrace(_) => "degenerate_trace",
                E::WindowTooLong { .. } => "window_too_long",
                E::EmptyWindow(_) => "empty_window",
                E::TraceTooShort { .. } => "trace_too_short",
                E::EmptyInput(_) => "empty_input",
                E::LengthMismatch(..) => "length_mismatch",
            },
        }
    }

    /// One-line JSON rendering for stderr.
    pub fn to_json_line(&self) -> String {
        let mut obj = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Model(vidpop::Error::InvalidParameter { name, .. }) => {
                obj["parameter"] = (*name).into();
            }
            CliError::MissingParameter(name) => obj["parameter"] = (*name).into(),
            CliError::Parse { line, .. } => obj["line"] = (*line).into(),
            _ => {}
        }
        obj.to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
