//! JSON text format for trees and their evaluations.
//!
//! ```json
//! {
//!   "num_players": 2,
//!   "root": 0,
//!   "players": ["White", "Black"],
//!   "nodes": [
//!     { "id": 0, "player": 1, "children": [1, 2], "label": "press" },
//!     { "id": 1, "payoffs": [0.0, 0.0] },
//!     { "id": 2, "payoffs": [-1.0, 1.0] }
//!   ],
//!   "evaluations": [[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]],
//!   "tiebreak_terminals": [1],
//!   "favored": 1
//! }
//! ```
//!
//! Node ids must be `0..n` in order. A node carries either `player` and
//! `children` (decision) or `payoffs` (terminal). `evaluations[i][x]` is
//! player `i`'s valuation of node `x`. The last two keys are optional and
//! only used by the fast-chess tiebreak mechanism.

use serde::{Deserialize, Serialize};

use super::mechanism::FastChessProxy;
use super::tree::{AiEvaluation, GameTree, NodeId, NodeSpec, PlayerId};
use super::GameError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeEntry {
    pub id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub player: Option<PlayerId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFixture {
    pub num_players: usize,
    pub root: NodeId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub players: Vec<String>,
    pub nodes: Vec<NodeEntry>,
    pub evaluations: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiebreak_terminals: Option<Vec<NodeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub favored: Option<PlayerId>,
}

impl TreeFixture {
    pub fn parse(text: &str) -> Result<Self, GameError> {
        serde_json::from_str(text).map_err(|e| GameError::Fixture(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fixture serializes")
    }

    /// Validates the fixture into a tree and its evaluation.
    pub fn build(&self) -> Result<(GameTree, AiEvaluation), GameError> {
        let mut specs = Vec::with_capacity(self.nodes.len());
        for (index, node) in self.nodes.iter().enumerate() {
            if node.id != index {
                return Err(GameError::Fixture(format!(
                    "node at position {index} has id {}; ids must be 0..n in order",
                    node.id
                )));
            }
            let spec = match (&node.payoffs, node.player) {
                (Some(p), None) if node.children.is_empty() => {
                    NodeSpec::Terminal { payoffs: p.clone() }
                }
                (None, Some(player)) => NodeSpec::Decision {
                    player,
                    children: node.children.clone(),
                },
                _ => {
                    return Err(GameError::Fixture(format!(
                        "node {index} must have either payoffs or a player with children"
                    )))
                }
            };
            specs.push(spec);
        }
        let tree = GameTree::new(self.num_players, self.root, specs)?;
        let ai = AiEvaluation::new(&tree, self.evaluations.clone())?;
        if let Some(terminals) = &self.tiebreak_terminals {
            if let Some(&bad) = terminals.iter().find(|&&z| !tree.is_terminal(z)) {
                return Err(GameError::Fixture(format!(
                    "tiebreak node {bad} is not terminal"
                )));
            }
        }
        if let Some(f) = self.favored {
            if f >= self.num_players {
                return Err(GameError::Fixture(format!(
                    "favored player {f} out of range"
                )));
            }
        }
        Ok((tree, ai))
    }

    /// The fast-chess mechanism described by the optional keys.
    ///
    /// Falls back to drawn terminals and player 0 when they are absent.
    pub fn fast_chess(&self, tree: &GameTree) -> FastChessProxy {
        let favored = self.favored.unwrap_or(0);
        match &self.tiebreak_terminals {
            Some(t) => FastChessProxy::new(t.iter().copied(), favored),
            None => FastChessProxy::from_draws(tree, favored),
        }
    }

    pub fn from_tree(tree: &GameTree, ai: &AiEvaluation) -> Self {
        let nodes = tree
            .to_specs()
            .into_iter()
            .enumerate()
            .map(|(id, spec)| match spec {
                NodeSpec::Decision { player, children } => NodeEntry {
                    id,
                    label: None,
                    player: Some(player),
                    children,
                    payoffs: None,
                },
                NodeSpec::Terminal { payoffs } => NodeEntry {
                    id,
                    label: None,
                    player: None,
                    children: Vec::new(),
                    payoffs: Some(payoffs),
                },
            })
            .collect();
        Self {
            num_players: tree.num_players(),
            root: tree.root(),
            players: Vec::new(),
            nodes,
            evaluations: ai.rows().to_vec(),
            tiebreak_terminals: None,
            favored: None,
        }
    }

    pub fn label(&self, node: NodeId) -> String {
        self.nodes
            .get(node)
            .and_then(|n| n.label.clone())
            .unwrap_or_else(|| format!("node {node}"))
    }

    pub fn player_name(&self, player: PlayerId) -> String {
        self.players
            .get(player)
            .cloned()
            .unwrap_or_else(|| format!("player {player}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::random::generate_random_tree;

    #[test]
    fn generated_trees_survive_the_text_format() {
        let (tree, ai) = generate_random_tree(3, 2, 2, 11).unwrap();
        let text = TreeFixture::from_tree(&tree, &ai).to_json();
        let (t2, a2) = TreeFixture::parse(&text).unwrap().build().unwrap();
        assert_eq!(tree, t2);
        assert_eq!(ai, a2);
    }

    #[test]
    fn rejects_out_of_order_ids_and_mixed_nodes() {
        let bad_ids = r#"{"num_players":1,"root":0,
            "nodes":[{"id":1,"payoffs":[0]},{"id":0,"player":0,"children":[0]}],
            "evaluations":[[0,0]]}"#;
        assert!(TreeFixture::parse(bad_ids).unwrap().build().is_err());

        let mixed = r#"{"num_players":1,"root":0,
            "nodes":[{"id":0,"player":0,"children":[1],"payoffs":[0]},{"id":1,"payoffs":[0]}],
            "evaluations":[[0,0]]}"#;
        assert!(TreeFixture::parse(mixed).unwrap().build().is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_garbage() {
        assert!(TreeFixture::parse("{").is_err());
        assert!(TreeFixture::parse(
            r#"{"num_players":1,"root":0,"nodes":[],"evaluations":[],"x":1}"#
        )
        .is_err());
    }

    #[test]
    fn non_terminal_tiebreak_node_is_rejected() {
        let text = r#"{"num_players":1,"root":0,
            "nodes":[{"id":0,"player":0,"children":[1]},{"id":1,"payoffs":[0]}],
            "evaluations":[[0,0]],"tiebreak_terminals":[0]}"#;
        assert!(TreeFixture::parse(text).unwrap().build().is_err());
    }
}
