//! Per-move pawn loss and total pawn loss value (TPLV).
//!
//! Every position of a game is searched once. With `s_k` the value of
//! position `k` for the side to move, the mover of ply `j` has
//! `value_best = s_{j-1}` and `value_played = -s_j`, and its pawn loss is
//! `max(0, value_best - value_played)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{self, Color};
use crate::engine::{normalize_eval, EngineError, EngineFingerprint, EngineScore, EngineSession};
use crate::pgn::{GameRecord, GameResult, Termination};

/// Slack for comparing sums of pawn losses.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("annotation stopped at ply {ply}; {player} TPLV over completed plies is {prefix_sum}")]
    Partial {
        player: Color,
        ply: usize,
        prefix_sum: f64,
    },
    #[error("{player} does not play in game {game}")]
    PlayerAbsent { player: String, game: String },
    #[error("{0} has no annotated moves")]
    NoMoves(String),
    #[error("no games for {0}")]
    NoGames(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Leading plies left out of the analysis (for example, book moves).
    pub skip_plies: usize,
    /// Also charge the player who accepted a draw offer.
    pub charge_acceptance: bool,
    /// Charge offers that did not end the game.
    pub charge_declined_offers: bool,
    /// Plies whose two positions are searched a second time for review.
    pub reeval_plies: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationKind {
    Move,
    DrawOffer,
    DrawAcceptance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveAnnotation {
    /// 1-based ply; offer and acceptance rows carry the ply they follow.
    pub ply: usize,
    pub mover: Color,
    pub kind: AnnotationKind,
    /// SAN of the move, or `draw offer` / `draw accepted`.
    pub played: String,
    pub best_move: Option<String>,
    pub value_best: f64,
    pub value_played: f64,
    pub pawn_loss: f64,
}

impl MoveAnnotation {
    fn new(
        ply: usize,
        mover: Color,
        kind: AnnotationKind,
        played: String,
        best_move: Option<String>,
        value_best: f64,
        value_played: f64,
    ) -> Self {
        let raw = value_best - value_played;
        if raw < -SUM_TOLERANCE {
            log::info!(
                "ply {ply}: played move rated {:.2} above the engine's best; loss clamped to 0",
                -raw
            );
        }
        Self {
            ply,
            mover,
            kind,
            played,
            best_move,
            value_best,
            value_played,
            pawn_loss: raw.max(0.0),
        }
    }
}

/// Engine verdict on one position of the game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionEval {
    /// Number of plies played before this position.
    pub index: usize,
    pub side_to_move: Color,
    /// Pawn value for the side to move.
    pub value: f64,
    pub best_move: Option<String>,
    /// Raw score; absent for mate and stalemate, which are valued directly.
    pub score: Option<EngineScore>,
    /// Engine output lines for this search.
    pub raw: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reevaluation {
    pub ply: usize,
    pub value_best: [f64; 2],
    pub value_played: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incomplete {
    /// Index of the position whose search failed.
    pub position: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedGame {
    pub game: GameRecord,
    pub annotations: Vec<MoveAnnotation>,
    pub tplv_white: f64,
    pub tplv_black: f64,
    pub fingerprint: EngineFingerprint,
    pub positions: Vec<PositionEval>,
    pub reevaluations: Vec<Reevaluation>,
    pub incomplete: Option<Incomplete>,
}

fn evaluate_position(
    session: &mut EngineSession,
    game: &GameRecord,
    boards: &[board::Board],
    k: usize,
    mate_cap: f64,
) -> Result<PositionEval, EngineError> {
    let b = &boards[k];
    let stm = board::side_to_move(b);
    if board::is_game_over(b) {
        let value = if board::is_checkmate(b) {
            -mate_cap
        } else {
            0.0
        };
        return Ok(PositionEval {
            index: k,
            side_to_move: stm,
            value,
            best_move: None,
            score: None,
            raw: Vec::new(),
        });
    }
    let e = session.evaluate_board(&game.position_ref(k), b)?;
    Ok(PositionEval {
        index: k,
        side_to_move: stm,
        value: normalize_eval(e.score, stm, stm, mate_cap),
        best_move: Some(e.best_move),
        score: Some(e.score),
        raw: e.transcript,
    })
}

fn uci_to_san(b: &board::Board, uci: &str) -> String {
    board::parse_uci_move(b, uci).map_or_else(|_| uci.to_string(), |m| board::san(b, m))
}

/// Annotates every ply of `game` with `session`.
///
/// An engine failure stops the work; the plies completed so far are kept
/// and [`AnnotatedGame::incomplete`] says where it stopped.
pub fn annotate_game(
    game: &GameRecord,
    session: &mut EngineSession,
    config: &AnalysisConfig,
) -> AnnotatedGame {
    let mate_cap = session.config().mate_cap;
    let boards = game.positions();
    let n = game.ply_count();
    let first = config.skip_plies.min(n);
    let mut positions = Vec::new();
    let mut incomplete = None;

    if let Err(e) = session.new_game() {
        incomplete = Some(Incomplete {
            position: first,
            error: e.to_string(),
        });
    } else {
        for k in first..=n {
            match evaluate_position(session, game, &boards, k, mate_cap) {
                Ok(p) => positions.push(p),
                Err(e) => {
                    incomplete = Some(Incomplete {
                        position: k,
                        error: e.to_string(),
                    });
                    break;
                }
            }
        }
    }

    let value = |k: usize| positions.get(k - first).map(|p: &PositionEval| p.value);
    let mut annotations = Vec::new();
    for j in first + 1..=n {
        let (Some(before), Some(after)) = (value(j - 1), value(j)) else {
            break;
        };
        let pe = &positions[j - 1 - first];
        annotations.push(MoveAnnotation::new(
            j,
            pe.side_to_move,
            AnnotationKind::Move,
            game.moves[j - 1].san.clone(),
            pe.best_move
                .as_deref()
                .map(|m| uci_to_san(&boards[j - 1], m)),
            before,
            -after,
        ));
    }

    if incomplete.is_none() {
        let accepted = game.accepted_draw_offer();
        for offer in &game.draw_offers {
            let is_accepted = accepted == Some(*offer);
            if offer.ply <= first || !(is_accepted || config.charge_declined_offers) {
                continue;
            }
            // After the offerer's move the opponent is to move.
            let opp_value = positions[offer.ply - first].value;
            annotations.push(MoveAnnotation::new(
                offer.ply,
                offer.player,
                AnnotationKind::DrawOffer,
                "draw offer".into(),
                None,
                -opp_value,
                0.0,
            ));
            if is_accepted && config.charge_acceptance {
                annotations.push(MoveAnnotation::new(
                    offer.ply,
                    offer.player.opposite(),
                    AnnotationKind::DrawAcceptance,
                    "draw accepted".into(),
                    positions[offer.ply - first]
                        .best_move
                        .as_deref()
                        .map(|m| uci_to_san(&boards[offer.ply], m)),
                    opp_value,
                    0.0,
                ));
            }
        }
        annotations.sort_by_key(|a| a.ply);
    }

    let mut reevaluations = Vec::new();
    if incomplete.is_none() {
        for &ply in &config.reeval_plies {
            if ply <= first || ply > n {
                log::warn!("re-evaluation ply {ply} is outside the analysed range");
                continue;
            }
            let mut again =
                |k| evaluate_position(session, game, &boards, k, mate_cap).map(|p| p.value);
            match (again(ply - 1), again(ply)) {
                (Ok(b), Ok(a)) => reevaluations.push(Reevaluation {
                    ply,
                    value_best: [positions[ply - 1 - first].value, b],
                    value_played: [-positions[ply - first].value, -a],
                }),
                (Err(e), _) | (_, Err(e)) => log::warn!("re-evaluation of ply {ply} failed: {e}"),
            }
        }
    }

    let sum = |c: Color| {
        annotations
            .iter()
            .filter(|a: &&MoveAnnotation| a.mover == c)
            .map(|a| a.pawn_loss)
            .sum()
    };
    AnnotatedGame {
        tplv_white: sum(Color::White),
        tplv_black: sum(Color::Black),
        game: game.clone(),
        annotations,
        fingerprint: session.fingerprint().clone(),
        positions,
        reevaluations,
        incomplete,
    }
}

/// Stored TPLV of `player`; an error if annotation did not finish.
pub fn tplv(annotated: &AnnotatedGame, player: Color) -> Result<f64, AnalysisError> {
    let stored = match player {
        Color::White => annotated.tplv_white,
        Color::Black => annotated.tplv_black,
    };
    match &annotated.incomplete {
        None => Ok(stored),
        Some(inc) => Err(AnalysisError::Partial {
            player,
            ply: inc.position,
            prefix_sum: stored,
        }),
    }
}

/// Per-game quantities the aggregate statistics need.
pub trait GameTotals {
    fn label(&self) -> String;
    fn player(&self, color: Color) -> &str;
    fn total(&self, color: Color) -> f64;
    /// Annotations charged to `color`, offers included.
    fn move_count(&self, color: Color) -> usize;

    fn color_of(&self, player: &str) -> Option<Color> {
        [Color::White, Color::Black]
            .into_iter()
            .find(|&c| self.player(c) == player)
    }
}

impl<T: GameTotals + ?Sized> GameTotals for &T {
    fn label(&self) -> String {
        (**self).label()
    }
    fn player(&self, color: Color) -> &str {
        (**self).player(color)
    }
    fn total(&self, color: Color) -> f64 {
        (**self).total(color)
    }
    fn move_count(&self, color: Color) -> usize {
        (**self).move_count(color)
    }
}

impl GameTotals for AnnotatedGame {
    fn label(&self) -> String {
        self.game.label()
    }
    fn player(&self, color: Color) -> &str {
        self.game.player_name(color)
    }
    fn total(&self, color: Color) -> f64 {
        match color {
            Color::White => self.tplv_white,
            Color::Black => self.tplv_black,
        }
    }
    fn move_count(&self, color: Color) -> usize {
        self.annotations.iter().filter(|a| a.mover == color).count()
    }
}

fn per_game<G: GameTotals>(games: &[G], player: &str) -> Result<Vec<(f64, usize)>, AnalysisError> {
    games
        .iter()
        .map(|g| match g.color_of(player) {
            Some(c) => Ok((g.total(c), g.move_count(c))),
            None => Err(AnalysisError::PlayerAbsent {
                player: player.into(),
                game: g.label(),
            }),
        })
        .collect()
}

/// Sum of `player`'s TPLVs over `games`.
pub fn cumulative_tplv<G: GameTotals>(games: &[G], player: &str) -> Result<f64, AnalysisError> {
    Ok(per_game(games, player)?.iter().map(|(t, _)| t).sum())
}

/// `100 × cumulative TPLV / moves`, counting offer annotations as moves.
pub fn average_centipawn_loss<G: GameTotals>(
    games: &[G],
    player: &str,
) -> Result<f64, AnalysisError> {
    let rows = per_game(games, player)?;
    let moves: usize = rows.iter().map(|(_, m)| m).sum();
    if moves == 0 {
        return Err(AnalysisError::NoMoves(player.into()));
    }
    Ok(100.0 * rows.iter().map(|(t, _)| t).sum::<f64>() / moves as f64)
}

/// Cumulative TPLV divided by the number of games.
pub fn average_tplv_per_game<G: GameTotals>(
    games: &[G],
    player: &str,
) -> Result<f64, AnalysisError> {
    if games.is_empty() {
        return Err(AnalysisError::NoGames(player.into()));
    }
    Ok(cumulative_tplv(games, player)? / games.len() as f64)
}

/// Whether the game takes part in game-level scoring.
pub fn is_scorable(result: GameResult, _termination: Termination) -> bool {
    result != GameResult::Unfinished
}
