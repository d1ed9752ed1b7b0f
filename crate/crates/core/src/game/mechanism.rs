use std::collections::BTreeSet;

use super::play::ModifiedPlay;
use super::tree::{ai_best_response, AiEvaluation, GameTree, NodeId, PlayerId};

/// A rule mapping an evaluation and a (modified) play to one score per player.
///
/// Lower scores mean higher-quality play. Implementations must be
/// deterministic.
pub trait ScoringMechanism: Sync {
    fn name(&self) -> &str;

    fn score(&self, tree: &GameTree, ai: &AiEvaluation, play: &ModifiedPlay) -> Vec<f64>;
}

/// Sum of per-decision losses against the AI best response.
///
/// For every decision of player `i` at node `x`, adds
/// `v_i(best(x)) - v_i(chosen(x))`. The substituted action is used at a
/// deviation node.
#[derive(Debug, Clone, Copy, Default)]
pub struct TplvRule;

impl ScoringMechanism for TplvRule {
    fn name(&self) -> &str {
        "tplv"
    }

    fn score(&self, tree: &GameTree, ai: &AiEvaluation, play: &ModifiedPlay) -> Vec<f64> {
        scoring_rule_f(tree, ai, play)
    }
}

pub fn scoring_rule_f(tree: &GameTree, ai: &AiEvaluation, play: &ModifiedPlay) -> Vec<f64> {
    let mut totals = vec![0.0; tree.num_players()];
    for d in play.decisions(tree) {
        let best = ai_best_response(tree, ai, d.node).expect("decision node on a validated play");
        totals[d.player] += ai.value(d.player, best) - ai.value(d.player, d.choice);
    }
    totals
}

/// Stand-in for a fast time-control tiebreak.
///
/// The score ignores move quality entirely. It is the probability that a
/// player fails to come out on top:
///
/// * a play ending in one of the `tiebreak_terminals` goes to a fast
///   tiebreak, which the `favored` player wins with `favored_win_prob`;
/// * any other terminal is decided on the board (0 for players with the
///   top payoff, 1 otherwise);
/// * a modified play whose deviation leaves the base path never reaches a
///   terminal and scores 0.5 for everyone.
#[derive(Debug, Clone)]
pub struct FastChessProxy {
    tiebreak_terminals: BTreeSet<NodeId>,
    favored: PlayerId,
    favored_win_prob: f64,
}

impl FastChessProxy {
    pub const DEFAULT_WIN_PROB: f64 = 0.9;

    pub fn new(tiebreak_terminals: impl IntoIterator<Item = NodeId>, favored: PlayerId) -> Self {
        Self {
            tiebreak_terminals: tiebreak_terminals.into_iter().collect(),
            favored,
            favored_win_prob: Self::DEFAULT_WIN_PROB,
        }
    }

    pub fn with_win_prob(mut self, p: f64) -> Self {
        self.favored_win_prob = p;
        self
    }

    /// Uses every terminal with all-equal payoffs (a drawn game) as a tiebreak.
    pub fn from_draws(tree: &GameTree, favored: PlayerId) -> Self {
        let draws = tree.terminals().filter(|&z| {
            let p = tree.payoffs(z).unwrap();
            p.iter().all(|x| (x - p[0]).abs() <= 1e-9)
        });
        Self::new(draws, favored)
    }

    pub fn tiebreak_terminals(&self) -> &BTreeSet<NodeId> {
        &self.tiebreak_terminals
    }

    pub fn favored(&self) -> PlayerId {
        self.favored
    }

    fn terminal_scores(&self, tree: &GameTree, z: NodeId) -> Vec<f64> {
        let n = tree.num_players();
        if self.tiebreak_terminals.contains(&z) {
            let others = if n > 1 {
                1.0 - (1.0 - self.favored_win_prob) / (n - 1) as f64
            } else {
                0.0
            };
            return (0..n)
                .map(|i| {
                    if i == self.favored {
                        1.0 - self.favored_win_prob
                    } else {
                        others
                    }
                })
                .collect();
        }
        let payoffs = tree.payoffs(z).unwrap();
        let top = payoffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        payoffs
            .iter()
            .map(|&p| if (top - p).abs() <= 1e-9 { 0.0 } else { 1.0 })
            .collect()
    }
}

impl ScoringMechanism for FastChessProxy {
    fn name(&self) -> &str {
        "fastchess-demo"
    }

    fn score(&self, tree: &GameTree, _ai: &AiEvaluation, play: &ModifiedPlay) -> Vec<f64> {
        match play.deviation() {
            None => self.terminal_scores(tree, play.base().terminal()),
            Some((_, action)) if tree.is_terminal(action) => self.terminal_scores(tree, action),
            Some(_) => vec![0.5; tree.num_players()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::play::{modify_play, Play};
    use crate::game::tree::NodeSpec;

    // Root (player 1) chooses between pressing (+1.0 for player 1) and a
    // draw (0.0); player 0 then picks a terminal.
    fn offer_tree() -> (GameTree, AiEvaluation) {
        let tree = GameTree::new(
            2,
            0,
            vec![
                NodeSpec::Decision {
                    player: 1,
                    children: vec![1, 2],
                },
                NodeSpec::Decision {
                    player: 0,
                    children: vec![3, 4],
                },
                NodeSpec::Terminal {
                    payoffs: vec![0.0, 0.0],
                },
                NodeSpec::Terminal {
                    payoffs: vec![0.0, 0.0],
                },
                NodeSpec::Terminal {
                    payoffs: vec![-1.0, 1.0],
                },
            ],
        )
        .unwrap();
        let ai = AiEvaluation::new(
            &tree,
            vec![
                vec![0.0, -1.0, 0.0, 0.0, -3.0],
                vec![0.0, 1.0, 0.0, 0.0, 3.0],
            ],
        )
        .unwrap();
        (tree, ai)
    }

    #[test]
    fn best_play_costs_nothing() {
        let (tree, ai) = offer_tree();
        let play = Play::to_terminal(&tree, 3).unwrap();
        assert_eq!(scoring_rule_f(&tree, &ai, &play.into()), vec![0.0, 0.0]);
    }

    #[test]
    fn deviating_to_the_draw_costs_one_pawn() {
        let (tree, ai) = offer_tree();
        let play = Play::to_terminal(&tree, 3).unwrap();
        let before = scoring_rule_f(&tree, &ai, &play.clone().into());
        let offered = modify_play(&tree, &play, 0, 2).unwrap();
        let after = scoring_rule_f(&tree, &ai, &offered);
        assert_eq!(after[1] - before[1], 1.0);
        assert_eq!(after[0], before[0]);
    }

    #[test]
    fn fast_chess_scores_by_outcome_only() {
        let (tree, ai) = offer_tree();
        let m = FastChessProxy::new([2, 3], 1);
        let drawn = Play::to_terminal(&tree, 2).unwrap();
        let s = m.score(&tree, &ai, &drawn.clone().into());
        assert!((s[1] - 0.1).abs() < 1e-12 && (s[0] - 0.9).abs() < 1e-12);
        let pressed = modify_play(&tree, &drawn, 0, 1).unwrap();
        assert_eq!(m.score(&tree, &ai, &pressed), vec![0.5, 0.5]);
        let won = Play::to_terminal(&tree, 4).unwrap();
        assert_eq!(m.score(&tree, &ai, &won.into()), vec![1.0, 0.0]);
    }

    #[test]
    fn from_draws_picks_equal_payoff_terminals() {
        let (tree, _) = offer_tree();
        let m = FastChessProxy::from_draws(&tree, 1);
        assert_eq!(
            m.tiebreak_terminals().iter().copied().collect::<Vec<_>>(),
            vec![2, 3]
        );
    }
}
