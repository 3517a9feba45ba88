use std::path::PathBuf;

/// Failures of a run, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("file not found: {} (referenced by `{field}`)", path.display())]
    MissingFile { field: String, path: PathBuf },

    #[error(transparent)]
    Numerical(#[from] emskin::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 2 config, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Config { .. } | CliError::MissingFile { .. } => 2,
            CliError::Numerical(emskin::Error::Io { .. } | emskin::Error::Csv { .. }) => 4,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
