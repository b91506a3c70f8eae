use thiserror::Error;

/// Errors raised by the workbench.
///
/// The variants are coarse on purpose: the command-line front end maps each
/// class onto a stable exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed text or binary input. `line` is 1-based when known.
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    /// Well-formed input that violates a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds a configured size or work limit.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A randomized search ran out of attempts.
    #[error("search failed: {0}")]
    SearchFailure(String),

    /// The correlation probability is exactly one half.
    #[error("no bias: correlation probability is 1/2, no amount of keystream suffices")]
    NoBias,

    /// The decision threshold exceeds the amount of available keystream.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The true candidate was rejected (empty candidate list).
    #[error("miss: {0}")]
    Miss(String),

    /// Adjacent function-word factors have incompatible widths.
    #[error("composition error: {0}")]
    Composition(String),

    /// Filesystem access failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line: Some(line),
            message: message.into(),
        }
    }

    pub(crate) fn parse_nl(message: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
