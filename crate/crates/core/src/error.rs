use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("vertex {0} would appear twice in the spliced sequence")]
    Splice(usize),

    #[error("reservoir budget exceeded: {used} used + {requested} requested > {budget}")]
    BudgetExceeded {
        used: usize,
        requested: usize,
        budget: usize,
    },

    #[error("absorption failed: {0}")]
    Absorption(String),

    #[error("no robust subgraph for link of {location:?}: {detail}")]
    Extraction {
        location: Vec<usize>,
        detail: String,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
