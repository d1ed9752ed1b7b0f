//! PGN game records.
//!
//! Tag pairs, movetext, comments, NAGs and variations are accepted; NAGs and
//! variations are discarded. Every move is replayed on a real board, so a
//! parsed [`GameRecord`] is always legal.
//!
//! A draw offer is written as a comment whose whole text is `draw offered`,
//! placed after the move made by the offering player:
//!
//! ```text
//! 62. Kf2 Kc7 {draw offered} 1/2-1/2
//! ```

mod lexer;
mod parser;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{self, Board, Color, START_FEN};
use crate::engine::PositionRef;

pub use parser::parse_pgn;

/// Exact comment text that marks a draw offer.
pub const DRAW_OFFER_COMMENT: &str = "draw offered";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PgnError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: illegal move `{san}` at ply {ply}: {reason}")]
    IllegalMove {
        line: usize,
        col: usize,
        ply: usize,
        san: String,
        reason: String,
    },
    #[error("{line}:{col}: Result tag `{tag}` disagrees with game terminator `{terminator}`")]
    ResultMismatch {
        line: usize,
        col: usize,
        tag: String,
        terminator: String,
    },
    #[error("{line}:{col}: bad FEN tag: {reason}")]
    BadFen {
        line: usize,
        col: usize,
        reason: String,
    },
    #[error("draw offer at ply {ply}: {reason}")]
    DrawOffer { ply: usize, reason: String },
}

impl PgnError {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        PgnError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameResult {
    WhiteWin,
    BlackWin,
    Draw,
    Unfinished,
}

impl GameResult {
    pub fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "1-0" => Some(Self::WhiteWin),
            "0-1" => Some(Self::BlackWin),
            "1/2-1/2" => Some(Self::Draw),
            "*" => Some(Self::Unfinished),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Self::WhiteWin => "1-0",
            Self::BlackWin => "0-1",
            Self::Draw => "1/2-1/2",
            Self::Unfinished => "*",
        }
    }

    pub fn winner(self) -> Option<Color> {
        match self {
            Self::WhiteWin => Some(Color::White),
            Self::BlackWin => Some(Color::Black),
            _ => None,
        }
    }

    /// Classical points: 1 for a win, ½ for a draw.
    pub fn points(self, player: Color) -> f64 {
        match (self, self.winner()) {
            (Self::Draw, _) => 0.5,
            (_, Some(w)) if w == player => 1.0,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Normal,
    TimeForfeit,
    Other,
}

impl Termination {
    /// Reads a `Termination` tag value. Unknown values become `Other`.
    pub fn from_tag(value: &str) -> Self {
        match value.trim().to_ascii_lowercase().as_str() {
            "normal" => Self::Normal,
            "time forfeit" | "time-forfeit" => Self::TimeForfeit,
            _ => Self::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PgnMove {
    /// Canonical SAN, re-rendered from the board.
    pub san: String,
    pub uci: String,
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawOffer {
    /// 1-based ply of the move after which the offer was made.
    pub ply: usize,
    pub player: Color,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    pub headers: BTreeMap<String, String>,
    /// FEN from the `FEN` tag, when the game did not start from the initial
    /// position.
    pub start_fen: Option<String>,
    pub moves: Vec<PgnMove>,
    pub result: GameResult,
    pub termination: Termination,
    pub draw_offers: Vec<DrawOffer>,
    /// Comments before the first move.
    pub leading_comments: Vec<String>,
    /// Line of the first token of this game in the source text.
    pub line: usize,
}

impl GameRecord {
    pub fn header(&self, tag: &str) -> Option<&str> {
        self.headers.get(tag).map(String::as_str)
    }

    pub fn player_name(&self, color: Color) -> &str {
        let tag = match color {
            Color::White => "White",
            Color::Black => "Black",
        };
        self.header(tag).unwrap_or("?")
    }

    pub fn ply_count(&self) -> usize {
        self.moves.len()
    }

    pub fn start_board(&self) -> Board {
        board::parse_fen(self.start_fen.as_deref().unwrap_or(START_FEN))
            .expect("start FEN validated at parse time")
    }

    /// Who moves at `ply` (1-based).
    pub fn mover(&self, ply: usize) -> Color {
        let first = board::side_to_move(&self.start_board());
        if ply % 2 == 1 {
            first
        } else {
            first.opposite()
        }
    }

    /// Boards before ply 1, after ply 1, ..., after the last ply.
    pub fn positions(&self) -> Vec<Board> {
        let mut b = self.start_board();
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        out.push(b);
        for m in &self.moves {
            let mv = board::parse_uci_move(&b, &m.uci).expect("moves validated at parse time");
            b = b.make_move_new(mv);
            out.push(b);
        }
        out
    }

    /// Position reached after the first `plies` moves, as an engine request.
    pub fn position_ref(&self, plies: usize) -> PositionRef {
        PositionRef {
            start_fen: self.start_fen.clone(),
            moves: self.moves[..plies].iter().map(|m| m.uci.clone()).collect(),
        }
    }

    /// The offer that ended the game, if it was drawn by agreement: a draw
    /// result with an offer on the final ply.
    pub fn accepted_draw_offer(&self) -> Option<DrawOffer> {
        if self.result != GameResult::Draw {
            return None;
        }
        self.draw_offers
            .last()
            .copied()
            .filter(|o| o.ply == self.moves.len() && o.ply > 0)
    }

    /// Records an offer after `ply`, keeping offers sorted.
    pub fn add_draw_offer(&mut self, ply: usize) -> Result<(), PgnError> {
        if ply == 0 || ply > self.moves.len() {
            return Err(PgnError::DrawOffer {
                ply,
                reason: format!("game has {} plies", self.moves.len()),
            });
        }
        let offer = DrawOffer {
            ply,
            player: self.mover(ply),
        };
        if let Err(i) = self.draw_offers.binary_search_by_key(&ply, |o| o.ply) {
            self.draw_offers.insert(i, offer);
        }
        Ok(())
    }

    /// Short label for diagnostics: `White - Black (Round)`.
    pub fn label(&self) -> String {
        let mut s = format!(
            "{} - {}",
            self.player_name(Color::White),
            self.player_name(Color::Black)
        );
        if let Some(r) = self.header("Round").filter(|r| !r.is_empty() && *r != "?") {
            s.push_str(&format!(" (round {r})"));
        }
        s
    }
}
