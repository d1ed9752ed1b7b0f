use serde::{Deserialize, Serialize};

use super::mechanism::ScoringMechanism;
use super::play::{enumerate_plays, modify_play, Play};
use super::tree::{ai_best_response, AiEvaluation, GameTree, NodeId, PlayerId};
use super::GameError;

/// Slack allowed when comparing mechanism scores.
pub const TSP_TOLERANCE: f64 = 1e-9;

/// Default ceiling on the number of plays [`check_tsp_mechanism`] will enumerate.
pub const DEFAULT_MAX_PLAYS: usize = 1_000_000;

/// A decision where switching to the AI best response would have made the
/// mover's score strictly worse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub player: PlayerId,
    pub node: NodeId,
    /// Action actually taken at `node`.
    pub chosen: NodeId,
    /// AI best response at `node`.
    pub best_response: NodeId,
    /// Mover's score with the best response substituted.
    pub score_with_best: f64,
    /// Mover's score on the play as played.
    pub score_original: f64,
}

/// Single-deviation check of one play.
///
/// For each decision, substitutes the AI best response and reports the
/// decision if the mover's score goes up by more than [`TSP_TOLERANCE`].
pub fn check_tsp_play(
    mechanism: &dyn ScoringMechanism,
    tree: &GameTree,
    ai: &AiEvaluation,
    play: &Play,
) -> Result<Vec<Violation>, GameError> {
    let original = mechanism.score(tree, ai, &play.clone().into());
    let mut violations = Vec::new();
    for d in play.decisions(tree) {
        let best = ai_best_response(tree, ai, d.node)?;
        let modified = modify_play(tree, play, d.node, best)?;
        let with_best = mechanism.score(tree, ai, &modified);
        if with_best[d.player] > original[d.player] + TSP_TOLERANCE {
            violations.push(Violation {
                player: d.player,
                node: d.node,
                chosen: d.choice,
                best_response: best,
                score_with_best: with_best[d.player],
                score_original: original[d.player],
            });
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayViolations {
    /// Terminal node identifying the play.
    pub terminal: NodeId,
    pub path: Vec<NodeId>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TspVerdict {
    pub mechanism: String,
    pub plays_checked: usize,
    /// Only plays with at least one violation are listed.
    pub failing_plays: Vec<PlayViolations>,
}

impl TspVerdict {
    pub fn is_tsp(&self) -> bool {
        self.failing_plays.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.failing_plays.iter().map(|p| p.violations.len()).sum()
    }
}

/// Runs [`check_tsp_play`] over every play of the tree.
pub fn check_tsp_mechanism(
    mechanism: &dyn ScoringMechanism,
    tree: &GameTree,
    ai: &AiEvaluation,
    max_plays: usize,
) -> Result<TspVerdict, GameError> {
    let plays = enumerate_plays(tree, max_plays)?;
    let mut failing_plays = Vec::new();
    for play in &plays {
        let violations = check_tsp_play(mechanism, tree, ai, play)?;
        if !violations.is_empty() {
            failing_plays.push(PlayViolations {
                terminal: play.terminal(),
                path: play.path().to_vec(),
                violations,
            });
        }
    }
    Ok(TspVerdict {
        mechanism: mechanism.name().to_string(),
        plays_checked: plays.len(),
        failing_plays,
    })
}
