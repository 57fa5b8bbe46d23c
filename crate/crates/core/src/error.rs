use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("column {0} is constant and cannot be standardized")]
    ConstantColumn(usize),

    #[error("column '{0}' is constant and cannot be standardized")]
    ConstantNamedColumn(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("dataset must be standardized for this operation")]
    NotStandardized,

    #[error("no observation carries positive weight")]
    NoPositiveWeight,

    #[error("negative or non-finite weight at observation {0}")]
    InvalidWeight(usize),

    #[error("invalid penalty {0}; lambda must be finite and non-negative")]
    InvalidLambda(f64),

    #[error("coordinate descent did not converge within {max_sweeps} sweeps")]
    DidNotConverge { max_sweeps: usize },

    #[error("solver failed at lambda index {index}: {source}")]
    PathPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("lambda index {index} out of range for a path of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("invalid Beta shape parameters a={a}, b={b}")]
    InvalidShape { a: f64, b: f64 },

    #[error("invalid fold count k={k} for n={n}")]
    InvalidFoldCount { k: usize, n: usize },

    #[error("invalid resample size m={m} for n={n}")]
    InvalidM { m: usize, n: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("every bootstrap replicate was degenerate")]
    AllReplicatesDegenerate,

    #[error("fold {fold} is empty")]
    FoldTooSmall { fold: usize },

    #[error("invalid tuning configuration: {0}")]
    InvalidConfig(String),

    #[error("truth model has an empty support")]
    DegenerateTruth,

    #[error("invalid scheme '{0}'")]
    InvalidScheme(String),

    #[error("{0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True when the error stems from unusable data rather than malformed input.
    pub fn is_degenerate_data(&self) -> bool {
        match self {
            Error::ConstantColumn(_)
            | Error::ConstantNamedColumn(_)
            | Error::AllReplicatesDegenerate
            | Error::NoPositiveWeight
            | Error::DegenerateTruth => true,
            Error::Replicate { source, .. } | Error::PathPoint { source, .. } => source.is_degenerate_data(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
