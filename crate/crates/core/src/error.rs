use alloc::string::String;

use thiserror::Error;

/// Which side of the information barrier attempted a forbidden read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Machine,
    Human,
}

/// The protected items a player may try to read from the other side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Secret {
    Context,
    Policies,
    Weights,
}

/// A forbidden cross-barrier access, reported by the view that caught it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Error)]
#[error("barrier fault in round {round}: {side:?} side tried to read the peer's {secret:?}")]
pub struct BarrierFault {
    pub side: Side,
    pub secret: Secret,
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} index {index} out of range (limit {limit})")]
    Range {
        what: &'static str,
        index: u64,
        limit: u64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numeric guard: {0}")]
    Numeric(String),
    #[error("algorithm requires barrier mode {required:?}, instance allows {found:?}")]
    Mode {
        required: crate::engine::BarrierMode,
        found: crate::engine::BarrierMode,
    },
    #[error(transparent)]
    Barrier(#[from] BarrierFault),
    #[error("protocol violation in round {round}: {detail}")]
    Protocol { round: usize, detail: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn range(what: &'static str, index: impl TryInto<u64>, limit: impl TryInto<u64>) -> Error {
    Error::Range {
        what,
        index: index.try_into().unwrap_or(u64::MAX),
        limit: limit.try_into().unwrap_or(u64::MAX),
    }
}
