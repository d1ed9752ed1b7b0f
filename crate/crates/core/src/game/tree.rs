use super::GameError;

/// Index of a node in a [`GameTree`].
pub type NodeId = usize;
/// Index of a player, `0..num_players`.
pub type PlayerId = usize;

/// Absolute tolerance used when checking the constant-sum property.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-9;

/// One node as supplied to [`GameTree::new`].
#[derive(Debug, Clone, PartialEq)]
pub enum NodeSpec {
    Decision {
        player: PlayerId,
        children: Vec<NodeId>,
    },
    Terminal {
        payoffs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Decision {
        player: PlayerId,
        children: Vec<NodeId>,
    },
    Terminal {
        payoffs: Vec<f64>,
    },
}

/// A finite perfect-information game tree with constant-sum terminal payoffs.
///
/// Nodes are dense indices `0..len()`. The tree is validated once at
/// construction and is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTree {
    num_players: usize,
    root: NodeId,
    nodes: Vec<Node>,
    parent: Vec<Option<NodeId>>,
    depth: Vec<usize>,
    constant_sum: f64,
}

impl GameTree {
    pub fn new(num_players: usize, root: NodeId, specs: Vec<NodeSpec>) -> Result<Self, GameError> {
        if num_players == 0 {
            return Err(GameError::Invalid(
                "a game needs at least one player".into(),
            ));
        }
        let n = specs.len();
        if root >= n {
            return Err(GameError::UnknownNode(root));
        }
        let mut parent = vec![None; n];
        let mut nodes = Vec::with_capacity(n);
        let mut constant_sum: Option<f64> = None;
        for (id, spec) in specs.into_iter().enumerate() {
            match spec {
                NodeSpec::Decision { player, children } => {
                    if player >= num_players {
                        return Err(GameError::Invalid(format!(
                            "node {id}: active player {player} out of range"
                        )));
                    }
                    if children.is_empty() {
                        return Err(GameError::Invalid(format!(
                            "node {id}: decision node without children"
                        )));
                    }
                    for &c in &children {
                        if c >= n {
                            return Err(GameError::UnknownNode(c));
                        }
                        if c == root {
                            return Err(GameError::Invalid(format!(
                                "node {id}: the root cannot be a child"
                            )));
                        }
                        if let Some(p) = parent[c] {
                            return Err(GameError::Invalid(format!(
                                "node {c} has two parents ({p} and {id})"
                            )));
                        }
                        parent[c] = Some(id);
                    }
                    nodes.push(Node::Decision { player, children });
                }
                NodeSpec::Terminal { payoffs } => {
                    if payoffs.len() != num_players {
                        return Err(GameError::Invalid(format!(
                            "node {id}: expected {num_players} payoffs, found {}",
                            payoffs.len()
                        )));
                    }
                    if payoffs.iter().any(|p| !p.is_finite()) {
                        return Err(GameError::Invalid(format!("node {id}: non-finite payoff")));
                    }
                    let sum: f64 = payoffs.iter().sum();
                    match constant_sum {
                        None => constant_sum = Some(sum),
                        Some(c) if (c - sum).abs() > ZERO_SUM_TOLERANCE => {
                            return Err(GameError::Invalid(format!(
                                "node {id}: payoffs sum to {sum}, other terminals sum to {c}"
                            )));
                        }
                        Some(_) => {}
                    }
                    nodes.push(Node::Terminal { payoffs });
                }
            }
        }

        // Every non-root node must hang off the root, and nothing may loop.
        let mut depth = vec![usize::MAX; n];
        depth[root] = 0;
        let mut stack = vec![root];
        let mut seen = 0usize;
        while let Some(id) = stack.pop() {
            seen += 1;
            if let Node::Decision { children, .. } = &nodes[id] {
                for &c in children {
                    depth[c] = depth[id] + 1;
                    stack.push(c);
                }
            }
        }
        if seen != n {
            return Err(GameError::Invalid(format!(
                "{} node(s) are unreachable from the root",
                n - seen
            )));
        }

        Ok(Self {
            num_players,
            root,
            nodes,
            parent,
            depth,
            constant_sum: constant_sum.unwrap_or(0.0),
        })
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The constant every terminal payoff profile sums to.
    pub fn constant_sum(&self) -> f64 {
        self.constant_sum
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node < self.nodes.len()
    }

    pub fn is_terminal(&self, node: NodeId) -> bool {
        matches!(self.nodes.get(node), Some(Node::Terminal { .. }))
    }

    /// Successors of `node` in their declared order (empty for terminals).
    pub fn children(&self, node: NodeId) -> &[NodeId] {
        match self.nodes.get(node) {
            Some(Node::Decision { children, .. }) => children,
            _ => &[],
        }
    }

    /// The player function: who moves at `node`. `None` at terminals.
    pub fn active_player(&self, node: NodeId) -> Option<PlayerId> {
        match self.nodes.get(node) {
            Some(Node::Decision { player, .. }) => Some(*player),
            _ => None,
        }
    }

    pub fn payoffs(&self, node: NodeId) -> Option<&[f64]> {
        match self.nodes.get(node) {
            Some(Node::Terminal { payoffs }) => Some(payoffs),
            _ => None,
        }
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent.get(node).copied().flatten()
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.depth[node]
    }

    pub fn terminals(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&id| self.is_terminal(id))
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals().count()
    }

    /// Root-to-`node` path.
    pub fn path_to(&self, node: NodeId) -> Vec<NodeId> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Back to the spec form accepted by [`GameTree::new`].
    pub fn to_specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| match n {
                Node::Decision { player, children } => NodeSpec::Decision {
                    player: *player,
                    children: children.clone(),
                },
                Node::Terminal { payoffs } => NodeSpec::Terminal {
                    payoffs: payoffs.clone(),
                },
            })
            .collect()
    }
}

/// A per-player node valuation `v_i : X -> R`, in pawn units.
#[derive(Debug, Clone, PartialEq)]
pub struct AiEvaluation {
    // values[player][node]
    values: Vec<Vec<f64>>,
}

impl AiEvaluation {
    pub fn new(tree: &GameTree, values: Vec<Vec<f64>>) -> Result<Self, GameError> {
        if values.len() != tree.num_players() {
            return Err(GameError::Invalid(format!(
                "evaluation covers {} players, tree has {}",
                values.len(),
                tree.num_players()
            )));
        }
        for (p, row) in values.iter().enumerate() {
            if row.len() != tree.len() {
                return Err(GameError::Invalid(format!(
                    "evaluation for player {p} covers {} nodes, tree has {}",
                    row.len(),
                    tree.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(GameError::Invalid(format!(
                    "evaluation for player {p} has a non-finite value"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn value(&self, player: PlayerId, node: NodeId) -> f64 {
        self.values[player][node]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }
}

/// The successor of `node` that maximizes the active player's valuation.
///
/// Ties go to the child listed first.
pub fn ai_best_response(
    tree: &GameTree,
    ai: &AiEvaluation,
    node: NodeId,
) -> Result<NodeId, GameError> {
    if !tree.contains(node) {
        return Err(GameError::UnknownNode(node));
    }
    let player = tree
        .active_player(node)
        .ok_or(GameError::TerminalNode(node))?;
    let mut best = None::<(NodeId, f64)>;
    for &child in tree.children(node) {
        let v = ai.value(player, child);
        match best {
            Some((_, bv)) if v <= bv => {}
            _ => best = Some((child, v)),
        }
    }
    // Decision nodes always have at least one child.
    Ok(best
        .map(|(c, _)| c)
        .expect("decision node without children"))
}
