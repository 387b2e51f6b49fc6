use std::fmt;

/// Errors raised by the library.
///
/// `InvalidInput` covers every rejected precondition; `Numerical` is reserved
/// for failures of a solver on otherwise valid data.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        Error::Numerical(msg.to_string())
    }

    /// Short machine-readable class of the error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Numerical(_) => "numerical",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// The message without its class prefix, on one line.
    pub fn reason(&self) -> String {
        let msg = match self {
            Error::InvalidInput(m) | Error::Numerical(m) | Error::Parse(m) => m.clone(),
            Error::Io(e) => e.to_string(),
        };
        msg.lines().map(str::trim).collect::<Vec<_>>().join(" ")
    }

    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
