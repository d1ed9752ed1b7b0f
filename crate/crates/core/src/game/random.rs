use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{AiEvaluation, GameTree, NodeSpec};
use super::GameError;

/// Evaluations are drawn uniformly from `[-EVAL_RANGE, EVAL_RANGE]`.
pub const EVAL_RANGE: f64 = 10.0;

/// A complete tree of the given depth and branching factor.
///
/// Players alternate by depth (`depth % num_players`). Terminal payoffs are
/// drawn in `[-1, 1]` for all but the last player, whose payoff closes the
/// sum to zero. The same seed always yields the same tree.
pub fn generate_random_tree(
    depth: usize,
    branching: usize,
    num_players: usize,
    seed: u64,
) -> Result<(GameTree, AiEvaluation), GameError> {
    if depth == 0 || branching == 0 || num_players == 0 {
        return Err(GameError::Invalid(
            "depth, branching and player count must all be positive".into(),
        ));
    }
    let total = (0..=depth)
        .try_fold(0usize, |acc, level| {
            branching
                .checked_pow(level as u32)
                .and_then(|n| acc.checked_add(n))
        })
        .filter(|&n| n <= 50_000_000)
        .ok_or_else(|| GameError::Invalid("requested tree is too large".into()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::with_capacity(total);
    // Breadth-first numbering: level k starts at sum_{j<k} b^j.
    let mut level_start = 0usize;
    let mut level_len = 1usize;
    for level in 0..=depth {
        let next_start = level_start + level_len;
        for i in 0..level_len {
            if level == depth {
                let mut payoffs: Vec<f64> = (0..num_players - 1)
                    .map(|_| rng.gen_range(-1.0..=1.0))
                    .collect();
                payoffs.push(-payoffs.iter().sum::<f64>());
                specs.push(NodeSpec::Terminal { payoffs });
            } else {
                let first = next_start + i * branching;
                specs.push(NodeSpec::Decision {
                    player: level % num_players,
                    children: (first..first + branching).collect(),
                });
            }
        }
        level_start = next_start;
        level_len *= branching;
    }
    let tree = GameTree::new(num_players, 0, specs)?;
    let values = (0..num_players)
        .map(|_| {
            (0..tree.len())
                .map(|_| rng.gen_range(-EVAL_RANGE..=EVAL_RANGE))
                .collect()
        })
        .collect();
    let ai = AiEvaluation::new(&tree, values)?;
    Ok((tree, ai))
}
