use thiserror::Error;

/// Errors produced by the optimizer and its front ends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the evaluated function.
    #[error("domain error in {what}: {value} ({reason})")]
    Domain {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A model or parameter set was rejected at construction.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    /// An expectation produced a non-finite value.
    #[error("non-finite {integrand} = {value} at gain node G = {node:e}")]
    NonFinite {
        integrand: &'static str,
        node: f64,
        value: f64,
    },

    /// An inner root solve failed to bracket or converge.
    #[error("{solver}: {reason} (bracket [{lo:e}, {hi:e}], target {target})")]
    Solver {
        solver: &'static str,
        reason: &'static str,
        lo: f64,
        hi: f64,
        target: f64,
    },

    /// Bracket doubling in the outer search passed the configured cap.
    #[error("no sign change of the decision function below C = {cap} bits/s/Hz (last value {last_value:e})")]
    UnboundedRoot { cap: f64, last_value: f64 },

    /// The equation has no finite root for these parameters.
    #[error("no finite root: {0}")]
    NoRoot(&'static str),

    /// Configuration file or flag error; `key` is the offending key path.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// One point of a parameter sweep failed.
    #[error("sweep over {param} failed at value {value}: {source}")]
    SweepPoint {
        param: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    /// A failure while evaluating one channel case.
    #[error("{case}: {source}")]
    InCase {
        case: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input rather than by a numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::Io(_) => true,
            Error::SweepPoint { source, .. } | Error::InCase { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
