//! A nine-node model of a drawn final game where the side that is better
//! can either keep pressing or offer a draw and go to a fast tiebreak.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixture::{NodeEntry, TreeFixture};
use super::tree::NodeId;

pub const WHITE: usize = 0;
pub const BLACK: usize = 1;

/// Root decision: Black keeps pressing (node 1) or offers a draw (node 2).
pub const ROOT: NodeId = 0;
pub const PRESS: NodeId = 1;
pub const OFFER: NodeId = 2;
/// Terminal reached when White accepts the offer.
pub const ACCEPTED: NodeId = 5;

// Black-perspective values: pressing is worth a pawn, a draw is worth 0,
// a won position is capped at 10.
const BLACK_VALUES: [f64; 9] = [1.0, 1.0, 0.0, 0.0, 10.0, 0.0, 1.0, 0.0, 10.0];

/// The bundled model.
pub fn draw_offer_model() -> TreeFixture {
    build(BLACK_VALUES)
}

/// The bundled model with uniform noise in `[-amplitude, amplitude]` added
/// to every non-root valuation. The two players' valuations stay opposite.
pub fn draw_offer_model_with_noise(seed: u64, amplitude: f64) -> TreeFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = BLACK_VALUES;
    for v in values.iter_mut().skip(1) {
        *v += rng.gen_range(-amplitude..=amplitude);
    }
    build(values)
}

fn build(black: [f64; 9]) -> TreeFixture {
    let decision = |id, label: &str, player, children: Vec<NodeId>| NodeEntry {
        id,
        label: Some(label.to_string()),
        player: Some(player),
        children,
        payoffs: None,
    };
    let terminal = |id, label: &str, payoffs: Vec<f64>| NodeEntry {
        id,
        label: Some(label.to_string()),
        player: None,
        children: Vec::new(),
        payoffs: Some(payoffs),
    };
    TreeFixture {
        num_players: 2,
        root: ROOT,
        players: vec!["White".into(), "Black".into()],
        nodes: vec![
            decision(0, "Black to move, a pawn better", BLACK, vec![1, 2]),
            decision(1, "Black plays the engine move", WHITE, vec![3, 4]),
            decision(2, "Black offers a draw", WHITE, vec![5, 6]),
            terminal(3, "White holds: draw, fast tiebreak", vec![0.0, 0.0]),
            terminal(4, "White cracks: Black wins", vec![-1.0, 1.0]),
            terminal(5, "White accepts: draw, fast tiebreak", vec![0.0, 0.0]),
            decision(6, "White declines, Black to move", BLACK, vec![7, 8]),
            terminal(7, "Black allows a draw: fast tiebreak", vec![0.0, 0.0]),
            terminal(8, "Black converts: Black wins", vec![-1.0, 1.0]),
        ],
        evaluations: vec![black.iter().map(|v| -v).collect(), black.to_vec()],
        tiebreak_terminals: Some(vec![3, 5, 7]),
        favored: Some(BLACK),
    }
}
