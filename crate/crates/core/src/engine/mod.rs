//! Talking to chess engines over UCI, and turning their scores into
//! per-player pawn values.

mod mock;
mod protocol;
mod score;
mod session;

use thiserror::Error;

pub use mock::{MockEngine, MockEntry, MockTable, MOCK_NAME};
pub use protocol::{parse_engine_line, EngineLine, Info};
pub use score::{normalize_eval, EngineScore, Perspective, ScoreKind, DEFAULT_MATE_CAP};
pub use session::{
    EngineConfig, EngineFingerprint, EngineSession, EngineSource, Evaluation, PositionRef,
    SearchLimit, Transport,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("failed to start engine: {0}")]
    Spawn(String),
    #[error("engine did not finish the handshake in time")]
    HandshakeTimeout,
    #[error("timed out waiting for the engine")]
    Timeout,
    #[error("engine rejected option `{0}`")]
    OptionRejected(String),
    #[error("engine crashed: {0}")]
    Crashed(String),
    #[error("malformed engine output `{line}`: {reason}")]
    Malformed { line: String, reason: String },
    #[error("illegal position: {0}")]
    IllegalPosition(String),
    #[error("position has no legal moves")]
    NoLegalMoves,
    #[error("engine refused the search: {0}")]
    Rejected(String),
    #[error("mock table line {line}: {reason}")]
    MockTable { line: usize, reason: String },
    #[error("engine configuration: {0}")]
    Config(String),
}
