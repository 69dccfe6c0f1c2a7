use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its admissible domain (k > n - 1, empty betas, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("genotype has {found} loci but the landscape has {expected}")]
    LengthMismatch { expected: usize, found: usize },

    /// A precondition on the caller's data was broken (e.g. aggregating zero samples).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("n = {n} is too large for exhaustive analysis (limit {limit})")]
    Intractable { n: usize, limit: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
