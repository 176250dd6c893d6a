use thiserror::Error;

/// Errors raised by the library.
///
/// Divergence is a signal rather than a bug: many functionals are only
/// defined on laws with enough finite moments, and callers are expected to
/// branch on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("law is not in the Orlicz space: {0}")]
    NotInOrliczSpace(String),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("operation requires a discrete law")]
    NotDiscrete,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular derivative: {0}")]
    Singular(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that come from the mathematics (divergent moments,
    /// missing roots) rather than from malformed input.
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            Error::Divergent(_) | Error::NotInOrliczSpace(_) | Error::NoRoot(_)
        )
    }

    /// Same error kind with `context` appended to the message.
    pub fn with_context(self, context: &str) -> Error {
        let join = |m: String| format!("{m} ({context})");
        match self {
            Error::Domain(m) => Error::Domain(join(m)),
            Error::Divergent(m) => Error::Divergent(join(m)),
            Error::NotInOrliczSpace(m) => Error::NotInOrliczSpace(join(m)),
            Error::NoRoot(m) => Error::NoRoot(join(m)),
            Error::TooLarge(m) => Error::TooLarge(join(m)),
            Error::NotDiscrete => Error::NotDiscrete,
            Error::Unsupported(m) => Error::Unsupported(join(m)),
            Error::Singular(m) => Error::Singular(join(m)),
            Error::Parse(m) => Error::Parse(join(m)),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
