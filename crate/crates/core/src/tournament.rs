//! Standings with TPLV tiebreaks, and two-player playoff plans.
//!
//! Players are ordered by raw score, then by TPLV (lower is better), then
//! by average centipawn loss. Players equal on all three share a rank and
//! are flagged unresolved; ranks after a shared rank skip.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, AnalysisError, GameTotals};
use crate::pgn::GameResult;

/// Values this close are treated as equal when ranking.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TournamentError {
    #[error("no players to rank")]
    Empty,
    #[error("{0} has no games")]
    NoGames(String),
    #[error("duplicate player {0}")]
    DuplicatePlayer(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("playoffs need exactly two players, got {0}")]
    UnsupportedPlayoff(usize),
    #[error("players are not in an unresolved tie")]
    NotTied,
    #[error("playoff is already decided")]
    PlayoffDecided,
    #[error("playoff games cannot be left unfinished")]
    UnfinishedResult,
}

/// Which TPLV figure breaks raw-score ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TplvKey {
    #[default]
    Cumulative,
    /// Cumulative TPLV divided by games played.
    Average,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankOptions {
    pub tplv_key: TplvKey,
    /// Wins an otherwise unresolved two-way tie.
    pub champion: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiebreakUsed {
    None,
    CumulativeTplv,
    AvgCpl,
    Champion,
    Unresolved,
}

/// One participant's inputs to the standings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerEntry {
    pub player: String,
    pub raw_score: f64,
    pub games: usize,
    pub cumulative_tplv: f64,
    pub average_tplv: f64,
    pub average_cpl: f64,
}

impl PlayerEntry {
    /// Aggregates `player`'s TPLVs over `games`, which must all include them.
    pub fn from_games<G: GameTotals>(
        player: &str,
        raw_score: f64,
        games: &[G],
    ) -> Result<Self, TournamentError> {
        if games.is_empty() {
            return Err(TournamentError::NoGames(player.into()));
        }
        Ok(Self {
            player: player.into(),
            raw_score,
            games: games.len(),
            cumulative_tplv: analysis::cumulative_tplv(games, player)?,
            average_tplv: analysis::average_tplv_per_game(games, player)?,
            average_cpl: analysis::average_centipawn_loss(games, player)?,
        })
    }

    fn tplv(&self, key: TplvKey) -> f64 {
        match key {
            TplvKey::Cumulative => self.cumulative_tplv,
            TplvKey::Average => self.average_tplv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standing {
    pub rank: usize,
    pub player: String,
    pub raw_score: f64,
    pub games: usize,
    pub cumulative_tplv: f64,
    pub average_tplv: f64,
    pub average_cpl: f64,
    pub tiebreak_used: TiebreakUsed,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RANK_TOLERANCE
}

/// The key that separates `a` from `b`, if any.
fn separation(a: &PlayerEntry, b: &PlayerEntry, key: TplvKey) -> Option<TiebreakUsed> {
    if !close(a.raw_score, b.raw_score) {
        Some(TiebreakUsed::None)
    } else if !close(a.tplv(key), b.tplv(key)) {
        Some(TiebreakUsed::CumulativeTplv)
    } else if !close(a.average_cpl, b.average_cpl) {
        Some(TiebreakUsed::AvgCpl)
    } else {
        None
    }
}

fn order(a: &PlayerEntry, b: &PlayerEntry, key: TplvKey) -> std::cmp::Ordering {
    let by = |x: f64, y: f64| {
        if close(x, y) {
            std::cmp::Ordering::Equal
        } else {
            x.total_cmp(&y)
        }
    };
    by(b.raw_score, a.raw_score)
        .then(by(a.tplv(key), b.tplv(key)))
        .then(by(a.average_cpl, b.average_cpl))
        .then_with(|| a.player.cmp(&b.player))
}

pub fn rank_players(
    entries: &[PlayerEntry],
    options: &RankOptions,
) -> Result<Vec<Standing>, TournamentError> {
    if entries.is_empty() {
        return Err(TournamentError::Empty);
    }
    let mut seen = std::collections::BTreeSet::new();
    for e in entries {
        if !seen.insert(e.player.as_str()) {
            return Err(TournamentError::DuplicatePlayer(e.player.clone()));
        }
    }
    let key = options.tplv_key;
    let mut sorted: Vec<&PlayerEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| order(a, b, key));

    let mut out: Vec<Standing> = Vec::with_capacity(sorted.len());
    for (i, e) in sorted.iter().enumerate() {
        let rank = match i {
            0 => 1,
            _ if separation(sorted[i - 1], e, key).is_none() => out[i - 1].rank,
            _ => i + 1,
        };
        let tiebreak_used = sorted
            .iter()
            .filter(|o| o.player != e.player && close(o.raw_score, e.raw_score))
            .map(|o| separation(e, o, key).unwrap_or(TiebreakUsed::Unresolved))
            .max()
            .unwrap_or(TiebreakUsed::None);
        out.push(Standing {
            rank,
            player: e.player.clone(),
            raw_score: e.raw_score,
            games: e.games,
            cumulative_tplv: e.cumulative_tplv,
            average_tplv: e.average_tplv,
            average_cpl: e.average_cpl,
            tiebreak_used,
        });
    }

    if let Some(champ) = &options.champion {
        apply_champion(&mut out, champ);
    }
    Ok(out)
}

fn apply_champion(out: &mut [Standing], champion: &str) {
    let Some(ci) = out.iter().position(|s| s.player == champion) else {
        return;
    };
    let rank = out[ci].rank;
    let tied: Vec<usize> = (0..out.len()).filter(|&i| out[i].rank == rank).collect();
    if tied.len() != 2 || out[ci].tiebreak_used != TiebreakUsed::Unresolved {
        return;
    }
    let other = tied.into_iter().find(|&i| i != ci).expect("two tied");
    out[other].rank = rank + 1;
    out[ci].tiebreak_used = TiebreakUsed::Champion;
    out[other].tiebreak_used = TiebreakUsed::Champion;
    if other < ci {
        out.swap(other, ci);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayoffGame {
    /// 1-based two-game cycle.
    pub cycle: usize,
    pub white: String,
    pub black: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlayoffStatus {
    InProgress,
    Decided { winner: String },
}

/// Two-game mini-matches, colours alternating, repeated while tied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayoffPlan {
    players: [String; 2],
    games: Vec<PlayoffGame>,
    results: Vec<GameResult>,
    status: PlayoffStatus,
}

impl PlayoffPlan {
    pub fn new(tied: &[&str]) -> Result<Self, TournamentError> {
        let [a, b] = tied else {
            return Err(TournamentError::UnsupportedPlayoff(tied.len()));
        };
        let mut plan = Self {
            players: [a.to_string(), b.to_string()],
            games: Vec::new(),
            results: Vec::new(),
            status: PlayoffStatus::InProgress,
        };
        plan.append_cycle();
        Ok(plan)
    }

    /// Plan for the players sharing first place without a tiebreak.
    pub fn for_standings(standings: &[Standing]) -> Result<Self, TournamentError> {
        let top: Vec<&str> = standings
            .iter()
            .filter(|s| s.rank == 1 && s.tiebreak_used == TiebreakUsed::Unresolved)
            .map(|s| s.player.as_str())
            .collect();
        match top.len() {
            0 | 1 => Err(TournamentError::NotTied),
            _ => Self::new(&top),
        }
    }

    fn append_cycle(&mut self) {
        let cycle = self.games.len() / 2 + 1;
        let [a, b] = &self.players;
        self.games.push(PlayoffGame {
            cycle,
            white: a.clone(),
            black: b.clone(),
        });
        self.games.push(PlayoffGame {
            cycle,
            white: b.clone(),
            black: a.clone(),
        });
    }

    pub fn games(&self) -> &[PlayoffGame] {
        &self.games
    }

    pub fn status(&self) -> &PlayoffStatus {
        &self.status
    }

    /// Next game without a result.
    pub fn next_game(&self) -> Option<&PlayoffGame> {
        match self.status {
            PlayoffStatus::InProgress => self.games.get(self.results.len()),
            PlayoffStatus::Decided { .. } => None,
        }
    }

    /// Records the result of [`Self::next_game`].
    pub fn record(&mut self, result: GameResult) -> Result<&PlayoffStatus, TournamentError> {
        if result == GameResult::Unfinished {
            return Err(TournamentError::UnfinishedResult);
        }
        if matches!(self.status, PlayoffStatus::Decided { .. }) {
            return Err(TournamentError::PlayoffDecided);
        }
        self.results.push(result);
        if self.results.len().is_multiple_of(2) {
            let start = self.results.len() - 2;
            let mut pts = [0.0; 2];
            for (g, r) in self.games[start..].iter().zip(&self.results[start..]) {
                for (i, p) in self.players.iter().enumerate() {
                    let color = if *p == g.white {
                        crate::Color::White
                    } else {
                        crate::Color::Black
                    };
                    pts[i] += r.points(color);
                }
            }
            if pts[0] == pts[1] {
                self.append_cycle();
            } else {
                let w = if pts[0] > pts[1] { 0 } else { 1 };
                self.status = PlayoffStatus::Decided {
                    winner: self.players[w].clone(),
                };
            }
        }
        Ok(&self.status)
    }
}
