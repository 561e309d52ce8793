use thiserror::Error;

use crate::model::ModelFamily;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input has no header or no usable data rows")]
    EmptyInput,

    #[error("duplicate column name `{0}` in header")]
    DuplicateHeader(String),

    #[error("column {column} has an empty name in the header")]
    EmptyHeader { column: usize },

    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("malformed CSV: {0}")]
    MalformedCsv(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("label `{0}` is also listed as a feature")]
    LabelInFeatures(String),

    #[error("feature `{0}` is listed more than once")]
    DuplicateFeature(String),

    #[error("at least one feature column is required")]
    NoFeatures,

    #[error("test percentage must lie in [0, 100), got {0}")]
    InvalidTestPercent(f64),

    #[error("split leaves no training rows")]
    EmptyTrain,

    #[error("polynomial order must lie in 1..=10, got {0}")]
    InvalidOrder(u32),

    #[error("{family} model needs positive inputs, got {value}")]
    Domain { family: ModelFamily, value: f64 },

    #[error("{0}")]
    Overflow(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("insufficient or degenerate data for this model family (singular normal matrix at pivot {pivot})")]
    SingularSystem { pivot: usize },

    #[error("label is constant, r² is undefined")]
    ConstantLabel,

    #[error("every model family failed to fit")]
    AllFamiliesFailed(Vec<(ModelFamily, Error)>),
}

impl Error {
    /// Stable machine-readable code, used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInput => "empty_input",
            Error::DuplicateHeader(_) => "duplicate_header",
            Error::EmptyHeader { .. } => "empty_header",
            Error::RaggedRow { .. } => "ragged_row",
            Error::MalformedCsv(_) => "malformed_csv",
            Error::UnknownColumn(_) => "unknown_column",
            Error::LabelInFeatures(_) => "label_in_features",
            Error::DuplicateFeature(_) => "duplicate_feature",
            Error::NoFeatures => "no_features",
            Error::InvalidTestPercent(_) => "invalid_test_percent",
            Error::EmptyTrain => "empty_train",
            Error::InvalidOrder(_) => "invalid_order",
            Error::Domain { .. } => "domain_error",
            Error::Overflow(_) => "overflow_error",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SingularSystem { .. } => "singular_system",
            Error::ConstantLabel => "constant_label",
            Error::AllFamiliesFailed(_) => "all_families_failed",
        }
    }
}
