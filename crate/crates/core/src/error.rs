use thiserror::Error;

/// Errors surfaced by the library. CLI commands map any of these to a
/// nonzero exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("difficulty must be in 1..=4, got {0}")]
    InvalidDifficulty(u8),

    #[error("cannot parse action {action:?}: unexpected token {token:?}")]
    UnparseableAction { action: String, token: String },

    #[error("action {0:?} is not a candidate in the current state")]
    NotACandidate(String),

    #[error("episode is over")]
    EpisodeOver,

    #[error("slot {0:?} is already bound")]
    SlotAlreadyBound(String),

    #[error("two action slots bind the same token {0:?}")]
    DuplicateSlotToken(String),

    #[error("unknown slot name {0:?}")]
    UnknownSlot(String),

    #[error("demonstration dataset is empty")]
    EmptyDataset,

    #[error("no demonstrations for action type {0:?}")]
    EmptyPart(String),

    #[error("frequency inconsistency: per-type support with zero global frequency")]
    InconsistentFrequency,

    #[error("corrupt or unreachable game state: {0}")]
    CorruptState(String),

    #[error("invalid config at {path}: {message}")]
    InvalidConfig { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
