use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel `{0}` has zero variance")]
    ConstantChannel(String),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("segment is {have} frames, {need} required")]
    TooShort { have: usize, need: usize },
    #[error("HAMD score must be non-negative, got {0}")]
    NegativeScore(i64),
    #[error("coupling matrix has spectral radius {0:.6} >= 1")]
    UnstableCoupling(f64),
    #[error("class configurations disagree on {0}")]
    MismatchedChannels(String),
    #[error("delay {delay} is not below the series length {len}")]
    DelayTooLarge { delay: usize, len: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training data contains a single class")]
    SingleClassDataset,
    #[error("no segment votes to aggregate")]
    EmptyVote,
    #[error("brute-force enumeration supports at most {max} segments, got {n}")]
    TooManySegments { n: usize, max: usize },
    #[error("empty input")]
    Empty,
    #[error("class {0} has no true samples")]
    MissingClass(&'static str),
    #[error("scores cover only one class")]
    SingleClass,
    #[error("split `{0}` is empty")]
    MissingSplit(String),
    #[error("malformed file {path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Broad failure category, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_)
            | Error::TooManySegments { .. }
            | Error::UnstableCoupling(_)
            | Error::MismatchedChannels(_) => ErrorKind::Config,
            _ => ErrorKind::Data,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ConstantChannel(_) => "ConstantChannel",
            Error::NonFinite => "NonFinite",
            Error::InvalidSeries(_) => "InvalidSeries",
            Error::Config(_) => "ConfigError",
            Error::TooShort { .. } => "TooShort",
            Error::NegativeScore(_) => "NegativeScore",
            Error::UnstableCoupling(_) => "UnstableCoupling",
            Error::MismatchedChannels(_) => "MismatchedChannels",
            Error::DelayTooLarge { .. } => "DelayTooLarge",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::SingleClassDataset => "SingleClassDataset",
            Error::EmptyVote => "EmptyVote",
            Error::TooManySegments { .. } => "TooManySegments",
            Error::Empty => "Empty",
            Error::MissingClass(_) => "MissingClass",
            Error::SingleClass => "SingleClass",
            Error::MissingSplit(_) => "MissingSplit",
            Error::Format { .. } => "FormatError",
            Error::Io { .. } => "IoError",
            Error::Json { .. } => "ParseError",
            Error::Csv { .. } => "CsvError",
        }
    }
}
