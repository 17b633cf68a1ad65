use thiserror::Error;

/// Everything that can go wrong between reading an instance and emitting a rounded solution.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("metric violation: {0}")]
    Metric(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unbounded linear program")]
    Unbounded,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A guarantee the rounding relies on did not hold on this input.
    #[error("bound falsified ({claim}): {detail}")]
    Falsified { claim: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn falsified(claim: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Falsified {
            claim: claim.into(),
            detail: detail.into(),
        }
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
