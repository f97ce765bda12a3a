use crate::game::{CellMark, StateIndex};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid board state: {0}")]
    InvalidState(String),

    #[error("cell {0} is already occupied")]
    OccupiedCell(usize),

    #[error("{0:?} is not the side to move")]
    WrongTurn(CellMark),

    #[error("board is terminal, no opponent move exists")]
    TerminalState,

    #[error("all belief mass was eliminated by the transition")]
    EmptySupport,

    #[error("observation has zero likelihood under every support state")]
    ZeroEvidence,

    #[error("Q-table has no entry for state {0}")]
    MissingQEntry(StateIndex),

    #[error("Q-table format version {found} is not supported (expected {expected})")]
    FormatVersionMismatch { found: u64, expected: u64 },

    #[error("invalid Q-table header: {0}")]
    InvalidHeader(String),

    #[error("corrupt Q-table entry for state {state}: {reason}")]
    CorruptEntry { state: String, reason: String },

    #[error("invalid window shape {0}x{1}, both sides must be in 1..=3")]
    InvalidWindow(usize, usize),

    #[error("need at least 2 samples, got {0}")]
    InsufficientSamples(usize),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
