//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Result`]. Variants carry a stable
//! machine-readable code (see [`Error::code`]) used by the CLI to build its
//! `error: <code>: <message>` diagnostics and to pick exit statuses.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain is empty, inverted, or not contained where required.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// An argument is structurally valid but violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two series do not overlap, or an operation requires alignment that
    /// does not hold.
    #[error("incompatible operands: {0}")]
    Incompatible(String),

    /// Query text failed to parse. `offset` is the byte position of the
    /// offending token within the input.
    #[error("syntax error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A query referenced a series id that is not in the catalog.
    #[error("unknown series: {0}")]
    UnknownSeries(String),

    /// A deterministic guarantee cannot be produced (e.g. a denominator
    /// interval containing zero).
    #[error("unbounded guarantee: {0}")]
    UnboundedGuarantee(String),

    /// Exact evaluation hit an undefined value (e.g. division by zero).
    #[error("undefined value: {0}")]
    Undefined(String),

    /// Malformed input data during ingestion.
    #[error("ingest error: {0}")]
    Ingest(String),

    /// A persisted catalog is malformed or has an unsupported version.
    #[error("store error: {0}")]
    Store(String),

    /// Underlying I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Builds an [`Error::InvalidDomain`].
    pub fn invalid_domain(msg: impl Into<String>) -> Self {
        Error::InvalidDomain(msg.into())
    }

    /// Builds an [`Error::InvalidArgument`].
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Builds an [`Error::Incompatible`].
    pub fn incompatible(msg: impl Into<String>) -> Self {
        Error::Incompatible(msg.into())
    }

    /// Builds an [`Error::Parse`] at a byte offset.
    pub fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse { offset, message: msg.into() }
    }

    /// Builds an [`Error::UnboundedGuarantee`].
    pub fn unbounded(msg: impl Into<String>) -> Self {
        Error::UnboundedGuarantee(msg.into())
    }

    /// Stable machine-readable code for this error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDomain(_) => "invalid-domain",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Incompatible(_) => "incompatible",
            Error::Parse { .. } => "parse",
            Error::UnknownSeries(_) => "unknown-series",
            Error::UnboundedGuarantee(_) => "unbounded-guarantee",
            Error::Undefined(_) => "undefined",
            Error::Ingest(_) => "ingest",
            Error::Store(_) => "store",
            Error::Io(_) => "io",
        }
    }

    /// True for errors caused by malformed query text or bad usage (CLI exit
    /// status 1); everything else is a data/evaluation error (exit status 2).
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::InvalidArgument(_))
    }
}
