use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A desk-scale guard refused the requested size.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A form or config file is malformed; `field` names the offending entry.
    #[error("malformed input in field `{field}`: {message}")]
    Format { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
