use std::path::PathBuf;

use crate::config::Origin;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}: {message}")]
    Config { origin: Origin, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{} already exists (use --force to overwrite)", .0.display())]
    WouldOverwrite(PathBuf),

    #[error(transparent)]
    Core(#[from] krein_core::KreinError),

    #[error("{0}")]
    Invalid(String),

    #[error("plot: {0}")]
    Plot(String),
}

impl CliError {
    pub fn config(origin: Origin, message: impl Into<String>) -> Self {
        CliError::Config {
            origin,
            message: message.into(),
        }
    }
}
