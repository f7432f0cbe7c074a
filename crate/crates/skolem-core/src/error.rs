use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("range error: {0}")]
    Range(String),
    /// A sign or equality decision that the precision cap could not settle.
    #[error("undetermined: {0}")]
    Undetermined(String),
    /// Information lost to series truncation.
    #[error("beyond working depth: {0}")]
    Depth(String),
    /// Symbolic and numeric evaluation disagree, or an internal invariant broke.
    #[error("engine fault: {0}")]
    Fault(String),
}

pub type Result<T> = std::result::Result<T, Error>;
