use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Model(#[from] purcellsim::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 1 for bad input, 2 when the numerics fail on valid input.
    pub fn exit_code(&self) -> u8 {
        use purcellsim::Error as E;
        match self {
            CliError::Model(E::NotConverged { .. } | E::AmbiguousLabel { .. } | E::LabelTracking { .. } | E::Fit(_)) => 2,
            _ => 1,
        }
    }
}
