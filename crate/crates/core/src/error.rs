use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside the domain of the operation.
    #[error("{quantity} = {value} is out of range (expected {expected})")]
    Domain {
        quantity: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("FOV index {index} is out of range for {count} FOV settings")]
    FovIndex { index: usize, count: usize },

    /// A composite parameter set violated one of its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            quantity,
            value,
            expected,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
