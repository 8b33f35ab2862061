use thiserror::Error;

/// Errors raised by the numeric core: plant, synthesis, interaction and engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A state, input or parameter was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A parameter is outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Gain synthesis is impossible for the given plant.
    #[error("synthesis error: {0}")]
    Synthesis(String),

    /// An input violates an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario key is missing, unknown or violates a rule.
    #[error("scenario key `{key}`: {rule}")]
    InvalidKey { key: String, rule: String },

    /// The scenario text is not well-formed.
    #[error("scenario syntax: {0}")]
    Syntax(String),

    /// The simulation produced a non-finite state and was stopped.
    #[error("simulation aborted at t = {t}: {diagnostics}")]
    Aborted { t: f64, diagnostics: String },
}

impl Error {
    pub(crate) fn key(key: impl Into<String>, rule: impl Into<String>) -> Self {
        Error::InvalidKey { key: key.into(), rule: rule.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
