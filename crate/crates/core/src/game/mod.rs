//! Finite perfect-information games, AI valuations, plays, scoring
//! mechanisms and a brute-force tiebreak-strategyproofness checker.

mod fixture;
mod mechanism;
mod play;
mod random;
pub mod toy;
mod tree;
mod tsp;

use thiserror::Error;

pub use fixture::{NodeEntry, TreeFixture};
pub use mechanism::{scoring_rule_f, FastChessProxy, ScoringMechanism, TplvRule};
pub use play::{enumerate_plays, modify_play, Decision, ModifiedPlay, Play};
pub use random::{generate_random_tree, EVAL_RANGE};
pub use tree::{ai_best_response, AiEvaluation, GameTree, NodeId, NodeSpec, PlayerId};
pub use tsp::{
    check_tsp_mechanism, check_tsp_play, PlayViolations, TspVerdict, Violation, DEFAULT_MAX_PLAYS,
    TSP_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game: {0}")]
    Invalid(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is terminal")]
    TerminalNode(NodeId),
    #[error("node {0} is not on the play's path")]
    NotOnPath(NodeId),
    #[error("{action} is not a successor of node {node}")]
    IllegalAction { node: NodeId, action: NodeId },
    #[error("invalid play: {0}")]
    InvalidPlay(String),
    #[error("more than {limit} plays; raise the enumeration bound to continue")]
    TooManyPlays { limit: usize },
    #[error("tree fixture: {0}")]
    Fixture(String),
}
