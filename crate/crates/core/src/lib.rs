//! Move-quality tiebreaks for chess and other zero-sum games.
//!
//! A chess engine rates every position; a player's *pawn loss* on a move is
//! how much worse the played move is than the engine's best, and the total
//! pawn loss value (TPLV) is the sum over a game. The modules here turn
//! engine output into TPLVs, score games and tournaments with them, and
//! check by enumeration that such scoring cannot be gamed by playing a
//! worse move.
//!
//! * [`game`]: abstract game trees and the strategyproofness checker.
//! * [`engine`]: UCI engine client, score normalization, table-driven mock.
//! * [`pgn`]: game-record parsing with legal-move replay.
//! * [`analysis`]: per-move pawn loss and TPLV.
//! * [`scoring`]: game-level scoring rules.
//! * [`tournament`]: standings and playoff plans.
//! * [`report`]: CSV and JSON reports.

pub mod analysis;
pub mod board;
pub mod engine;
pub mod game;
pub mod pgn;
pub mod report;
pub mod scoring;
pub mod tournament;

pub use board::Color;
