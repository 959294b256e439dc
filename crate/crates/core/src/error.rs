use thiserror::Error;

/// Failure modes shared by every module.
///
/// The variants line up with the command-line exit codes: domain, contract
/// and witness failures map to 1, parse failures to 2, broken internal
/// invariants to 3 and exhausted searches to 4.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid apartness witness: {0}")]
    Witness(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("search bound exceeded: {0}")]
    SearchBound(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Contract(_) | Error::Witness(_) => 1,
            Error::Parse(_) => 2,
            Error::Invariant(_) => 3,
            Error::SearchBound(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
