use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("rule at trace index {index} is not enabled")]
    RuleNotEnabled { index: usize },

    #[error("resource limit exceeded after exploring {explored} items (budget {budget})")]
    ResourceLimit { explored: usize, budget: usize },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
