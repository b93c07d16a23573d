use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The utility model breaks the monotonicity/convexity requirements it
    /// must satisfy for the book density to be positive.
    #[error("model violation: {0}")]
    ModelViolation(String),

    /// Invalid configuration. `key` names the offending setting.
    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    /// The price simulation produced a non-finite sample.
    #[error("simulation error at step {step}: {message}")]
    Simulation { step: usize, message: String },

    /// A strategy drives the book volume negative, overshoots the target,
    /// or trades at an order-flow arrival.
    #[error("inadmissible strategy at t = {time}: {message}")]
    Admissibility { time: f64, message: String },

    /// The QVI sweep failed to produce a valid value field.
    #[error("solver error at time slice {slice}: {message}")]
    Solver { slice: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
