use thiserror::Error;

/// Errors raised by dataset validation, distance evaluation, compilation and
/// the solver backends.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} has {found} columns, expected {expected}")]
    Dimension {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("need at least {min} rows, got {found}")]
    TooFewRows { min: usize, found: usize },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("expected {expected} labels, got {found}")]
    LabelCount { expected: usize, found: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distance between rows {i} and {j}: {source}")]
    Metric {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model has {num_vars} variables; exhaustive search is limited to {limit}")]
    TooManyVariables { num_vars: usize, limit: usize },

    #[error("enumeration of {count} assignments exceeds the limit of {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("selection is empty")]
    EmptySelection,

    #[error("{ticker}: non-positive price {price} on {date}")]
    NonPositivePrice {
        ticker: String,
        date: String,
        price: f64,
    },

    #[error("{ticker}: missing price on {date}")]
    MissingPrice { ticker: String, date: String },

    #[error("{ticker}: duplicate price on {date}")]
    DuplicatePrice { ticker: String, date: String },

    #[error("return {value} at position {index} is <= -1")]
    DegenerateReturn { index: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
