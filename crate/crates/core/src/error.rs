use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("derivative order {0} outside 0..=3")]
    InvalidDerivativeOrder(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid trim region: {0}")]
    InvalidTrimRegion(String),

    #[error("invalid evaluation grid: {0}")]
    InvalidGrid(String),

    /// No observation falls inside the kernel support around the evaluation point.
    #[error("empty kernel neighborhood")]
    EmptyNeighborhood,

    #[error("every observation was trimmed")]
    AllTrimmed,

    #[error("no trimmed-in observations")]
    NoTrimmedObservations,

    #[error("integrated squared curvature is zero; AMISE plug-in undefined")]
    ZeroCurvature,

    #[error("malformed CSV at row {row}, column {column}: {message}")]
    MalformedCsv {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("empty file")]
    EmptyFile,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// Stable machine-readable identifier, printed by the CLI on failure.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidDerivativeOrder(_) => "InvalidDerivativeOrder",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidSample(_) => "InvalidSample",
            Error::InvalidTrimRegion(_) => "InvalidTrimRegion",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::EmptyNeighborhood => "EmptyNeighborhood",
            Error::AllTrimmed => "AllTrimmed",
            Error::NoTrimmedObservations => "NoTrimmedObservations",
            Error::ZeroCurvature => "ZeroCurvature",
            Error::MalformedCsv { .. } => "MalformedCsv",
            Error::EmptyFile => "EmptyFile",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
            Error::Serialization(_) => "Serialization",
        }
    }

    /// Process exit status used by the CLI: 2 for bad input/configuration, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::MalformedCsv { .. }
            | Error::EmptyFile
            | Error::InvalidParameter(_)
            | Error::InvalidGrid(_)
            | Error::InvalidTrimRegion(_)
            | Error::InvalidSample(_) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
