use thiserror::Error;

/// Errors produced by the matching pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or unsupported PGM input.
    #[error("format error at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    /// A parameter outside its documented range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// The gradient operator needs at least a 3x3 neighbourhood.
    #[error("image is {width}x{height}, need at least 3x3")]
    TooSmall { width: usize, height: usize },

    /// Edge extraction produced no current elements.
    #[error("no edge current in {0}")]
    EmptyCurrent(&'static str),

    /// Invalid call argument (start outside the map, mismatched sizes, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn format(offset: usize, reason: impl Into<String>) -> Self {
        Error::Format {
            offset,
            reason: reason.into(),
        }
    }
}
