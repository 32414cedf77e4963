use std::fmt;

use thiserror::Error;

/// Where in an input stream a parse error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Line(usize),
    Byte(usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Line(n) => write!(f, "line {n}"),
            Position::Byte(n) => write!(f, "byte {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    NotText,
    MalformedHeader,
    UnsupportedFormat,
    InvalidRecord,
    IndexOutOfRange,
    DegenerateFace,
    TruncatedBody,
}

impl ParseErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParseErrorKind::NotText => "not-text",
            ParseErrorKind::MalformedHeader => "malformed-header",
            ParseErrorKind::UnsupportedFormat => "unsupported-format",
            ParseErrorKind::InvalidRecord => "invalid-record",
            ParseErrorKind::IndexOutOfRange => "index-out-of-range",
            ParseErrorKind::DegenerateFace => "degenerate-face",
            ParseErrorKind::TruncatedBody => "truncated-body",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} at {position}: {message}", kind.as_str())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: Position,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, position: Position, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("input outside domain: {0}")]
    Domain(String),
    #[error("coordinate outside UTM validity band: {0}")]
    OutOfBand(String),
    #[error("coordinate frame mismatch: {0}")]
    Frame(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("depth log contains no valid samples ({skipped} lines skipped)")]
    EmptyLog { skipped: usize },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unusable resolution: {0}")]
    Resolution(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("mesh is not watertight: {boundary_edges} boundary edges, {non_manifold_edges} non-manifold edges")]
    NotWatertight {
        boundary_edges: usize,
        non_manifold_edges: usize,
    },
    #[error("point outside field coverage: {0}")]
    Coverage(String),
    #[error("solver failed after {iterations} iterations (relative residual {residual:.3e}): {reason}")]
    Solver {
        iterations: usize,
        residual: f64,
        reason: String,
    },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    /// Stable, machine-parsable error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Domain(_) => "input-domain",
            Error::OutOfBand(_) => "out-of-band",
            Error::Frame(_) => "frame",
            Error::Parse(_) => "parse",
            Error::EmptyLog { .. } => "empty-log",
            Error::Degenerate(_) => "degenerate-geometry",
            Error::Parameter(_) => "parameter",
            Error::Resolution(_) => "resolution",
            Error::Precondition(_) => "precondition",
            Error::NotWatertight { .. } => "not-watertight",
            Error::Coverage(_) => "coverage",
            Error::Solver { .. } => "solver",
            Error::Io(_) => "io",
            Error::Internal(_) => "internal",
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::EmptyLog { .. } | Error::Io(_) => 2,
            Error::Domain(_) | Error::OutOfBand(_) => 2,
            Error::Frame(_)
            | Error::Degenerate(_)
            | Error::Parameter(_)
            | Error::Resolution(_)
            | Error::Precondition(_)
            | Error::NotWatertight { .. }
            | Error::Coverage(_) => 3,
            Error::Solver { .. } => 4,
            Error::Internal(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
