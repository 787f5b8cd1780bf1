use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    /// A malformed line in one of the TSV inputs.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("unknown {kind} '{name}'")]
    Lookup { kind: &'static str, name: String },

    #[error("{0}")]
    Build(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// A ratio whose denominator is zero.
    #[error("undefined value: {0}")]
    UndefinedValue(String),

    #[error("empty scope: {0}")]
    EmptyScope(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    Input(String),
}

impl Error {
    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn lookup(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Lookup {
            kind,
            name: name.into(),
        }
    }

    /// Short machine-readable code used in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Lookup { .. } => "lookup",
            Error::Build(_) => "build",
            Error::Config(_) => "config",
            Error::UndefinedValue(_) => "undefined",
            Error::EmptyScope(_) => "empty-scope",
            Error::Domain(_) => "domain",
            Error::Input(_) => "input",
        }
    }
}
