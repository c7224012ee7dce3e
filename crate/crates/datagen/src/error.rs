use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error("transcript is empty")]
    EmptyText,
    #[error("cannot align: {0}")]
    AlignmentError(String),
    #[error("recipe {recipe} needs {modality} but the inputs have none")]
    MissingModality { recipe: String, modality: String },
    #[error("pattern {0} cannot be realized from one transcript")]
    UnsupportedPattern(String),
    #[error("malformed pattern {0:?}")]
    BadPattern(String),
    #[error("formula {0} is not a known task formula")]
    UnknownFormula(String),
    #[error("mixture weights sum to {sum}, expected 1")]
    BadWeights { sum: f64 },
    #[error("record has no audio tokens")]
    EmptyAudio,
    #[error("unsupported attribute {0:?}")]
    UnknownAttribute(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("budget {budget} exceeds the {supply} available records")]
    BudgetExceedsSupply { budget: usize, supply: usize },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}
