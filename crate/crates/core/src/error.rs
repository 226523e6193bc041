use thiserror::Error;

/// Errors raised by the statistics library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An observation carries a category outside its declared domain.
    #[error("row {row}: {field} = {value} is outside [1, {max}]")]
    CategoryOutOfRange {
        row: usize,
        field: &'static str,
        value: u32,
        max: u32,
    },

    /// Input that does not satisfy a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numeric routine was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A test or simulation plan that cannot be executed as configured.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
