use serde::{Deserialize, Serialize};

use crate::board::Color;

/// Default valuation, in pawns, given to a forced mate.
pub const DEFAULT_MATE_CAP: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    Centipawns,
    Mate,
}

/// Whose point of view a raw score is expressed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perspective {
    SideToMove,
    White,
}

/// A raw engine score: centipawns, or moves to mate (negative when the
/// perspective side is being mated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EngineScore {
    pub kind: ScoreKind,
    pub value: i32,
    pub perspective: Perspective,
}

impl EngineScore {
    pub fn cp(value: i32) -> Self {
        Self {
            kind: ScoreKind::Centipawns,
            value,
            perspective: Perspective::SideToMove,
        }
    }

    /// Mate in `moves` for the side to move; `None` for `moves == 0`.
    pub fn mate(moves: i32) -> Option<Self> {
        (moves != 0).then_some(Self {
            kind: ScoreKind::Mate,
            value: moves,
            perspective: Perspective::SideToMove,
        })
    }

    pub fn with_perspective(mut self, perspective: Perspective) -> Self {
        self.perspective = perspective;
        self
    }
}

impl std::fmt::Display for EngineScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ScoreKind::Centipawns => write!(f, "cp {}", self.value),
            ScoreKind::Mate => write!(f, "mate {}", self.value),
        }
    }
}

/// Converts a raw score to pawn units from `player`'s point of view.
///
/// Centipawns are divided by 100 and clamped to `±mate_cap`; mates map to
/// `±mate_cap`. The two players' values are always exact negatives.
pub fn normalize_eval(
    score: EngineScore,
    player: Color,
    side_to_move: Color,
    mate_cap: f64,
) -> f64 {
    let pawns = match score.kind {
        ScoreKind::Centipawns => (f64::from(score.value) / 100.0).clamp(-mate_cap, mate_cap),
        ScoreKind::Mate => {
            if score.value > 0 {
                mate_cap
            } else {
                -mate_cap
            }
        }
    };
    let owner = match score.perspective {
        Perspective::SideToMove => side_to_move,
        Perspective::White => Color::White,
    };
    if owner == player {
        pawns
    } else {
        -pawns
    }
}
