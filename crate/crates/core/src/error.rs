use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, solvers and the experiment front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested operation is not available for the chosen function family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The time stepper produced a non-finite value.
    #[error("numerical blowup at t = {t}")]
    Blowup { t: f64 },

    /// An iterative method hit its iteration cap.
    #[error("{method} did not converge after {iterations} iterations (last residual {residual:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A mathematical precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed configuration input.
    #[error("config error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Config { line, msg: msg.into() }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Domain(_) | Error::Unsupported(_) => 2,
            Error::Blowup { .. } | Error::NotConverged { .. } | Error::Io { .. } => 3,
            Error::Precondition(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
