use alloc::string::String;

use crate::fairness::Side;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: unknown readmitted value `{value}`")]
    UnknownLabel { row: usize, value: String },
    #[error("row {row}: cannot parse age bin `{value}`")]
    BadAgeBin { row: usize, value: String },
    #[error("row {row}: column `{column}` value `{value}` is not numeric")]
    NumericParse { column: String, row: usize, value: String },
    #[error("invalid group spec `{name}`: {reason}")]
    InvalidGroupSpec { name: String, reason: String },
    #[error("unknown group spec `{0}`")]
    UnknownGroupSpec(String),
    #[error("test fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("stratum y={label} has {size} rows, too few to populate both train and test")]
    StratumTooSmall { label: u8, size: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("value {value} at index {index} is not binary")]
    NotBinary { index: usize, value: u8 },
    #[error("{0} group has no unmasked rows")]
    EmptyGroup(Side),
    #[error("{rate} undefined for {side} group (zero denominator)")]
    UndefinedRate { side: Side, rate: &'static str },
    #[error("labels contain a single class")]
    SingleClass,
    #[error("reweighing cell ({side}, {label}) is empty")]
    EmptyCell { side: Side, label: &'static str },
    #[error("training diverged at iteration {iteration}")]
    Divergence { iteration: usize },
    #[error("non-finite feature value at row {row}, feature {feature}")]
    NonFiniteFeature { row: usize, feature: usize },
    #[error("feature count mismatch: model has {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("mixer is unsolvable: target base cost equals target cost")]
    UnsolvableMixer,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(&'static str),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("empty dataset")]
    EmptyDataset,
}
