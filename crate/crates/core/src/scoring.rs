//! Game scores with a TPLV tiebreak.
//!
//! Under [`Variant::Def4`] a game pays outcome points (win 2, draw 1 each)
//! plus one bonus point to the player with the strictly lower TPLV, or half
//! a point each when the TPLVs tie. Totals are always 3. Under
//! [`Variant::Norway`] a win pays 3 and a draw splits 2.5 as 1.5 to the
//! tiebreak winner and 1 to the loser.
//!
//! In both variants a player who loses on time but has the lower TPLV ends
//! the game with 1 point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::Color;
use crate::pgn::{GameResult, Termination};

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("TPLV must be a non-negative number, got {0}")]
    NegativeTplv(f64),
    #[error("unfinished games are not scored")]
    Unfinished,
    #[error("invalid rule: {0}")]
    InvalidRule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Def4,
    Norway,
}

impl std::str::FromStr for Variant {
    type Err = ScoringError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "def4" => Ok(Self::Def4),
            "norway" | "norway-variant" => Ok(Self::Norway),
            _ => Err(ScoringError::InvalidRule(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    #[default]
    Exact,
    Relative,
}

impl std::str::FromStr for ThresholdMode {
    type Err = ScoringError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "relative" => Ok(Self::Relative),
            _ => Err(ScoringError::InvalidRule(format!(
                "unknown threshold mode `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringRule {
    pub variant: Variant,
    pub threshold_mode: ThresholdMode,
    /// Relative tie band, as a fraction of the larger TPLV.
    pub threshold_value: f64,
    /// Absolute tie band in pawns.
    pub absolute_epsilon: f64,
}

impl Default for ScoringRule {
    fn default() -> Self {
        Self {
            variant: Variant::Def4,
            threshold_mode: ThresholdMode::Exact,
            threshold_value: 0.0,
            absolute_epsilon: DEFAULT_EPSILON,
        }
    }
}

impl ScoringRule {
    pub fn relative(threshold: f64) -> Self {
        Self {
            threshold_mode: ThresholdMode::Relative,
            threshold_value: threshold,
            ..Self::default()
        }
    }

    pub fn norway() -> Self {
        Self {
            variant: Variant::Norway,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        if !(0.0..1.0).contains(&self.threshold_value) {
            return Err(ScoringError::InvalidRule(format!(
                "threshold {} is outside [0, 1)",
                self.threshold_value
            )));
        }
        if !(self.absolute_epsilon >= 0.0 && self.absolute_epsilon.is_finite()) {
            return Err(ScoringError::InvalidRule(format!(
                "epsilon {} must be a non-negative number",
                self.absolute_epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    ALower,
    BLower,
    Tie,
}

fn check_tplv(x: f64) -> Result<(), ScoringError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ScoringError::NegativeTplv(x))
    }
}

pub fn tplv_compare(a: f64, b: f64, rule: &ScoringRule) -> Result<Comparison, ScoringError> {
    check_tplv(a)?;
    check_tplv(b)?;
    let gap = (a - b).abs();
    let tie = gap <= rule.absolute_epsilon
        || (rule.threshold_mode == ThresholdMode::Relative
            && gap <= rule.threshold_value * a.max(b).max(rule.absolute_epsilon));
    Ok(if tie {
        Comparison::Tie
    } else if a < b {
        Comparison::ALower
    } else {
        Comparison::BLower
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Win,
    Draw,
    TimeForfeitException,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameScore {
    pub score_white: f64,
    pub score_black: f64,
    pub tiebreak_winner: Option<Color>,
    pub basis: Basis,
    /// Set when a relative threshold turned a strict exact-mode decision
    /// into a tie.
    pub warning: Option<String>,
}

impl GameScore {
    pub fn score(&self, c: Color) -> f64 {
        match c {
            Color::White => self.score_white,
            Color::Black => self.score_black,
        }
    }
}

pub fn score_game(
    result: GameResult,
    termination: Termination,
    tplv_white: f64,
    tplv_black: f64,
    rule: &ScoringRule,
) -> Result<GameScore, ScoringError> {
    rule.validate()?;
    let cmp = tplv_compare(tplv_white, tplv_black, rule)?;
    let tiebreak_winner = match cmp {
        Comparison::ALower => Some(Color::White),
        Comparison::BLower => Some(Color::Black),
        Comparison::Tie => None,
    };
    let warning = match (cmp, rule.threshold_mode) {
        (Comparison::Tie, ThresholdMode::Relative)
            if (tplv_white - tplv_black).abs() > rule.absolute_epsilon =>
        {
            Some(format!(
                "TPLVs {tplv_white:.2} and {tplv_black:.2} differ by {:.2} but fall inside the {}% relative threshold; exact mode would decide this tiebreak",
                (tplv_white - tplv_black).abs(),
                rule.threshold_value * 100.0
            ))
        }
        _ => None,
    };
    let mut s = [0.0f64; 2];
    let at = |c: Color| c.index();
    let basis = match result {
        GameResult::Unfinished => return Err(ScoringError::Unfinished),
        GameResult::Draw => {
            match (rule.variant, tiebreak_winner) {
                (Variant::Def4, Some(w)) => {
                    s[at(w)] = 2.0;
                    s[at(w.opposite())] = 1.0;
                }
                (Variant::Def4, None) => s = [1.5, 1.5],
                (Variant::Norway, Some(w)) => {
                    s[at(w)] = 1.5;
                    s[at(w.opposite())] = 1.0;
                }
                (Variant::Norway, None) => s = [1.25, 1.25],
            }
            Basis::Draw
        }
        GameResult::WhiteWin | GameResult::BlackWin => {
            let winner = result.winner().expect("decisive");
            let loser = winner.opposite();
            match rule.variant {
                Variant::Def4 => {
                    s[at(winner)] = 2.0;
                    match tiebreak_winner {
                        Some(w) => s[at(w)] += 1.0,
                        None => {
                            s[at(winner)] += 0.5;
                            s[at(loser)] += 0.5;
                        }
                    }
                }
                Variant::Norway => {
                    s[at(winner)] = 3.0;
                    if termination == Termination::TimeForfeit && tiebreak_winner == Some(loser) {
                        s[at(loser)] = 1.0;
                    }
                }
            }
            if termination == Termination::TimeForfeit && tiebreak_winner == Some(loser) {
                Basis::TimeForfeitException
            } else {
                Basis::Win
            }
        }
    };
    Ok(GameScore {
        score_white: s[0],
        score_black: s[1],
        tiebreak_winner,
        basis,
        warning,
    })
}
