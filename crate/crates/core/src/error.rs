use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scenario or model parameters. `line` is 1-based when the
    /// problem can be traced to a location in a scenario file.
    #[error("{}", fmt_config(.line, .message))]
    Config {
        line: Option<usize>,
        message: String,
    },

    #[error("policy {policy} is infeasible for agent {agent}: {reason}")]
    PolicyInfeasible {
        agent: usize,
        policy: &'static str,
        reason: String,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed record in {}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },
}

fn fmt_config(line: &Option<usize>, message: &str) -> String {
    match line {
        Some(line) => format!("configuration error at line {line}: {message}"),
        None => format!("configuration error: {message}"),
    }
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            message: message.into(),
        }
    }

    pub fn config_at(line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
