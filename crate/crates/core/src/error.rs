use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument outside the operation's domain.
    #[error("usage error: {0}")]
    Usage(String),

    /// A configuration key failed validation.
    #[error("configuration error: `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("configuration file {path}: {message}")]
    ConfigSyntax { path: PathBuf, message: String },

    #[error("protocol {protocol}, trial {trial}: {source}")]
    Trial {
        protocol: String,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than the runtime environment.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Usage(_) | Error::Config { .. } | Error::ConfigSyntax { .. } => true,
            Error::Trial { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
