use thiserror::Error;

/// Errors raised by the simulator's operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: u64,
        range: &'static str,
    },

    #[error("size mismatch: expected {expected} processes, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("vertex sets overlap on {0:?}")]
    OverlappingVertexSets(Vec<usize>),

    #[error("round {round}: graph {graph} is not in the {family} alphabet")]
    NotInAlphabet {
        round: u64,
        graph: String,
        family: String,
    },

    #[error("round {round}: lossy run of {run} rounds exceeds the bound k = {k}")]
    LossyRunTooLong { round: u64, run: u64, k: u64 },

    #[error("enumeration of {count} candidates exceeds the guard of {limit}")]
    ExplosionGuard { count: u128, limit: u128 },

    #[error("round {round} is beyond the simulated horizon {horizon}")]
    RoundOutOfRange { round: u64, horizon: u64 },

    #[error("no patient padding found within the cap of {cap} rounds")]
    PatienceExhausted { cap: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
