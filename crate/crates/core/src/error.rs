use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has {got} entries, expected {expected}")]
    DimensionMismatch { what: String, expected: usize, got: usize },
    #[error("diameter in dimension {dim} must be positive and at most the range width (got {value})")]
    NonPositiveDiameter { dim: usize, value: f64 },
    #[error("lower bound {lower} is not below upper bound {upper} in dimension {dim}")]
    EmptyRange { dim: usize, lower: f64, upper: f64 },
    #[error("abstract state space does not fit in 64 bits")]
    StateSpaceOverflow,
    #[error("state component {dim} = {value} is outside [{lower}, {upper}]")]
    OutOfBounds {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("box lies entirely outside the state-space bounds")]
    EmptyIntersection,
    #[error("unknown action index {0}")]
    UnknownAction(usize),
    #[error("unknown environment `{0}` (expected pendulum, mountain-car, cartpole or platoon)")]
    UnknownEnvironment(String),
    #[error("policy granularity does not match: {0}")]
    GranularityMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown proposition or variable `{0}`")]
    UnknownProposition(String),
    #[error("formula references undeclared atom `{0}`")]
    UndeclaredAtom(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(what: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            got,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
