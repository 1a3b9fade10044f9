use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] wpt_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// `error: kind=<kind> message=<text>` on one line.
    pub fn machine_line(&self) -> String {
        let message: String = self
            .to_string()
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        format!("error: kind={} message={}", self.kind(), message)
    }
}
