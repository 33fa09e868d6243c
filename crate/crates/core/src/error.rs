use crate::ledger::ElementId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum Error {
    #[error("element {0} compared with itself")]
    IdenticalIds(ElementId),
    #[error("element {id} out of range for ledger of length {len}")]
    OutOfRange { id: ElementId, len: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("rank {rank} out of range 1..={len}")]
    RankOutOfRange { rank: usize, len: usize },

    #[error("network width {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("halver width {0} is odd")]
    OddWidth(usize),
    #[error("arrangement of length {got} does not match network width {width}")]
    WidthMismatch { width: usize, got: usize },
    #[error("malformed network: {0}")]
    MalformedNetwork(String),
    #[error("network width {0} exceeds the exhaustive-check cap of 24")]
    TooWide(usize),
    #[error("network is not a selection network for rank {0}")]
    NotSelectionNetwork(usize),

    #[error("comparison digraph still has {0} sinks")]
    MultipleSinks(usize),
    #[error("claimed minimum {claimed} is not the unique sink {sink}")]
    InconsistentClaim { claimed: ElementId, sink: ElementId },
    #[error("comparison ({0}, {1}) does not follow the mergesort access pattern")]
    UnsupportedAccessPattern(ElementId, ElementId),
    #[error("merge input is not sorted at position {0}")]
    UnsortedInput(usize),

    #[error("need at least 3 distinct sizes to fit growth curves, got {0}")]
    InsufficientData(usize),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig { field: field.to_string(), reason: reason.into() }
}
