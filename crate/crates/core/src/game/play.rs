use super::tree::{GameTree, NodeId, PlayerId};
use super::GameError;

/// One action: the active player at `node` moves to `choice`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decision {
    pub player: PlayerId,
    pub node: NodeId,
    pub choice: NodeId,
}

/// A root-to-terminal path together with its per-player action sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Play {
    path: Vec<NodeId>,
    actions_by_player: Vec<Vec<(NodeId, NodeId)>>,
}

impl Play {
    pub fn from_path(tree: &GameTree, path: Vec<NodeId>) -> Result<Self, GameError> {
        let first = *path
            .first()
            .ok_or_else(|| GameError::InvalidPlay("empty path".into()))?;
        if first != tree.root() {
            return Err(GameError::InvalidPlay(format!(
                "path starts at {first}, not at the root {}",
                tree.root()
            )));
        }
        let last = *path.last().unwrap();
        if !tree.contains(last) {
            return Err(GameError::UnknownNode(last));
        }
        if !tree.is_terminal(last) {
            return Err(GameError::InvalidPlay(format!(
                "path ends at non-terminal node {last}"
            )));
        }
        let mut actions_by_player = vec![Vec::new(); tree.num_players()];
        for pair in path.windows(2) {
            let (node, next) = (pair[0], pair[1]);
            if !tree.children(node).contains(&next) {
                return Err(GameError::InvalidPlay(format!(
                    "{next} is not a successor of {node}"
                )));
            }
            let player = tree
                .active_player(node)
                .ok_or(GameError::TerminalNode(node))?;
            actions_by_player[player].push((node, next));
        }
        Ok(Self {
            path,
            actions_by_player,
        })
    }

    /// The unique play ending at terminal node `terminal`.
    pub fn to_terminal(tree: &GameTree, terminal: NodeId) -> Result<Self, GameError> {
        if !tree.contains(terminal) {
            return Err(GameError::UnknownNode(terminal));
        }
        Self::from_path(tree, tree.path_to(terminal))
    }

    pub fn path(&self) -> &[NodeId] {
        &self.path
    }

    pub fn terminal(&self) -> NodeId {
        *self.path.last().unwrap()
    }

    /// `(node, chosen successor)` pairs of `player`, in order of play.
    pub fn actions_of(&self, player: PlayerId) -> &[(NodeId, NodeId)] {
        self.actions_by_player
            .get(player)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn num_players(&self) -> usize {
        self.actions_by_player.len()
    }

    /// The action taken at `node`, if `node` is a decision node on the path.
    pub fn choice_at(&self, node: NodeId) -> Option<NodeId> {
        self.path.windows(2).find(|w| w[0] == node).map(|w| w[1])
    }

    /// All decisions along the path in order of play.
    pub fn decisions<'a>(&'a self, tree: &'a GameTree) -> impl Iterator<Item = Decision> + 'a {
        self.path.windows(2).map(move |w| Decision {
            player: tree.active_player(w[0]).expect("validated play"),
            node: w[0],
            choice: w[1],
        })
    }
}

/// A play with at most one action substituted.
///
/// The substituted sequence is generally not a play itself, so it is kept
/// as base plus deviation rather than re-materialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifiedPlay {
    base: Play,
    deviation: Option<(NodeId, NodeId)>,
}

impl ModifiedPlay {
    pub fn base(&self) -> &Play {
        &self.base
    }

    /// `(node, substituted action)` if the play differs from its base.
    pub fn deviation(&self) -> Option<(NodeId, NodeId)> {
        self.deviation
    }

    pub fn is_unmodified(&self) -> bool {
        self.deviation.is_none()
    }

    /// The action sequence after substitution, in order of play.
    pub fn decisions<'a>(&'a self, tree: &'a GameTree) -> impl Iterator<Item = Decision> + 'a {
        self.base.decisions(tree).map(move |mut d| {
            if let Some((node, action)) = self.deviation {
                if d.node == node {
                    d.choice = action;
                }
            }
            d
        })
    }
}

impl From<Play> for ModifiedPlay {
    fn from(base: Play) -> Self {
        Self {
            base,
            deviation: None,
        }
    }
}

impl PartialEq<Play> for ModifiedPlay {
    fn eq(&self, other: &Play) -> bool {
        self.deviation.is_none() && &self.base == other
    }
}

/// Replaces the action at `node` with `action`, holding everything else fixed.
///
/// Choosing the action already taken gives back the unmodified play.
pub fn modify_play(
    tree: &GameTree,
    play: &Play,
    node: NodeId,
    action: NodeId,
) -> Result<ModifiedPlay, GameError> {
    let original = play.choice_at(node).ok_or(GameError::NotOnPath(node))?;
    if !tree.children(node).contains(&action) {
        return Err(GameError::IllegalAction { node, action });
    }
    let deviation = (action != original).then_some((node, action));
    Ok(ModifiedPlay {
        base: play.clone(),
        deviation,
    })
}

/// Every play of the tree, in depth-first order of the children lists.
///
/// Fails once more than `limit` plays have been found.
pub fn enumerate_plays(tree: &GameTree, limit: usize) -> Result<Vec<Play>, GameError> {
    let mut plays = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(node) = stack.pop() {
        if tree.is_terminal(node) {
            if plays.len() == limit {
                return Err(GameError::TooManyPlays { limit });
            }
            plays.push(Play::to_terminal(tree, node)?);
        } else {
            stack.extend(tree.children(node).iter().rev());
        }
    }
    Ok(plays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tree::NodeSpec;

    // 0 (p0) -> 1 (p1) -> {3, 4}; 0 -> 2 terminal
    fn small() -> GameTree {
        GameTree::new(
            2,
            0,
            vec![
                NodeSpec::Decision {
                    player: 0,
                    children: vec![1, 2],
                },
                NodeSpec::Decision {
                    player: 1,
                    children: vec![3, 4],
                },
                NodeSpec::Terminal {
                    payoffs: vec![0.0, 0.0],
                },
                NodeSpec::Terminal {
                    payoffs: vec![1.0, -1.0],
                },
                NodeSpec::Terminal {
                    payoffs: vec![-1.0, 1.0],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn play_decomposes_by_active_player() {
        let tree = small();
        let play = Play::to_terminal(&tree, 4).unwrap();
        assert_eq!(play.path(), &[0, 1, 4]);
        assert_eq!(play.actions_of(0), &[(0, 1)]);
        assert_eq!(play.actions_of(1), &[(1, 4)]);
    }

    #[test]
    fn rejects_bad_paths() {
        let tree = small();
        assert!(Play::from_path(&tree, vec![0, 1]).is_err());
        assert!(Play::from_path(&tree, vec![1, 3]).is_err());
        assert!(Play::from_path(&tree, vec![0, 3]).is_err());
        assert!(Play::from_path(&tree, vec![]).is_err());
    }

    #[test]
    fn identity_deviation_equals_base() {
        let tree = small();
        let play = Play::to_terminal(&tree, 3).unwrap();
        let m = modify_play(&tree, &play, 1, 3).unwrap();
        assert!(m.is_unmodified());
        assert_eq!(m, play);
    }

    #[test]
    fn deviation_at_root_is_recorded() {
        let tree = small();
        let play = Play::to_terminal(&tree, 3).unwrap();
        let m = modify_play(&tree, &play, 0, 2).unwrap();
        assert_eq!(m.deviation(), Some((0, 2)));
        assert_ne!(m, play);
        let choices: Vec<_> = m.decisions(&tree).map(|d| (d.node, d.choice)).collect();
        assert_eq!(choices, vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn modify_off_path_or_illegal_fails() {
        let tree = small();
        let play = Play::to_terminal(&tree, 2).unwrap();
        assert!(matches!(
            modify_play(&tree, &play, 1, 3),
            Err(GameError::NotOnPath(1))
        ));
        assert!(matches!(
            modify_play(&tree, &play, 0, 3),
            Err(GameError::IllegalAction { .. })
        ));
    }

    #[test]
    fn enumeration_finds_every_terminal_and_respects_limit() {
        let tree = small();
        let plays = enumerate_plays(&tree, 10).unwrap();
        let ends: Vec<_> = plays.iter().map(Play::terminal).collect();
        assert_eq!(ends, vec![3, 4, 2]);
        assert!(matches!(
            enumerate_plays(&tree, 2),
            Err(GameError::TooManyPlays { limit: 2 })
        ));
    }
}
