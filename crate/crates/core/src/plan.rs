//! Conditional plans stored as a node arena with structural sharing.

use serde::{Deserialize, Serialize};

use crate::model::{ActionId, SensingId, ValueIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanNode {
    /// A concurrent actuation step; `None` child marks a leaf.
    Act {
        actions: Vec<ActionId>,
        child: Option<NodeId>,
    },
    /// A sensing step with one edge per possible outcome.
    Sense {
        sensing: SensingId,
        edges: Vec<(ValueIdx, NodeId)>,
    },
}

impl PlanNode {
    pub fn children(&self) -> Vec<NodeId> {
        match self {
            PlanNode::Act { child, .. } => child.iter().copied().collect(),
            PlanNode::Sense { edges, .. } => edges.iter().map(|&(_, n)| n).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlanStats {
    pub tree_size: u64,
    pub dag_size: u64,
    pub max_depth: u64,
    pub sensing_nodes: u64,
    pub leaves: u64,
}

/// A plan whose root may be absent: the goal already holds initially.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConditionalPlan {
    nodes: Vec<PlanNode>,
    root: Option<NodeId>,
}

impl ConditionalPlan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(nodes: Vec<PlanNode>, root: Option<NodeId>) -> Self {
        ConditionalPlan { nodes, root }
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn set_root(&mut self, root: Option<NodeId>) {
        self.root = root;
    }

    pub fn is_empty_plan(&self) -> bool {
        self.root.is_none()
    }

    pub fn nodes(&self) -> &[PlanNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &PlanNode {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut PlanNode {
        &mut self.nodes[id.index()]
    }

    pub fn add(&mut self, node: PlanNode) -> NodeId {
        self.nodes.push(node);
        NodeId(self.nodes.len() as u32 - 1)
    }

    /// Unique nodes reachable from the root, in preorder (children in edge
    /// order).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeId> = self.root.into_iter().collect();
        while let Some(n) = stack.pop() {
            if seen[n.index()] {
                continue;
            }
            seen[n.index()] = true;
            out.push(n);
            for c in self.node(n).children().into_iter().rev() {
                if !seen[c.index()] {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Whether `target` is reachable from `from` (inclusive).
    pub fn reaches(&self, from: NodeId, target: NodeId) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == target {
                return true;
            }
            if std::mem::replace(&mut seen[n.index()], true) {
                continue;
            }
            stack.extend(self.node(n).children());
        }
        false
    }

    pub fn has_cycle(&self) -> bool {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let Some(root) = self.root else {
            return false;
        };
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        state[root.index()] = 1;
        while let Some(top) = stack.last_mut() {
            let (n, next) = *top;
            let children = self.node(n).children();
            if next < children.len() {
                top.1 += 1;
                let c = children[next];
                match state[c.index()] {
                    1 => return true,
                    0 => {
                        state[c.index()] = 1;
                        stack.push((c, 0));
                    }
                    _ => {}
                }
            } else {
                state[n.index()] = 2;
                stack.pop();
            }
        }
        false
    }

    /// Tree statistics with shared subtrees counted once per occurrence.
    /// Assumes an acyclic plan.
    pub fn stats(&self) -> PlanStats {
        let Some(root) = self.root else {
            return PlanStats::default();
        };
        let order = self.preorder();
        #[derive(Clone, Copy, Default)]
        struct M {
            tree: u64,
            depth: u64,
            sensing: u64,
            leaves: u64,
        }
        let mut memo: Vec<Option<M>> = vec![None; self.nodes.len()];
        // Reverse preorder is not a topological order for DAGs in general,
        // so evaluate with an explicit post-order.
        let mut stack: Vec<(NodeId, bool)> = vec![(root, false)];
        while let Some((n, expanded)) = stack.pop() {
            if memo[n.index()].is_some() {
                continue;
            }
            let node = self.node(n);
            let children = node.children();
            if !expanded {
                stack.push((n, true));
                for c in children {
                    if memo[c.index()].is_none() {
                        stack.push((c, false));
                    }
                }
                continue;
            }
            let mut m = M {
                tree: 1,
                depth: 1,
                sensing: u64::from(matches!(node, PlanNode::Sense { .. })),
                leaves: 0,
            };
            if children.is_empty() {
                m.leaves = 1;
            }
            for c in children {
                let cm = memo[c.index()].unwrap_or_default();
                m.tree = m.tree.saturating_add(cm.tree);
                m.depth = m.depth.max(cm.depth + 1);
                m.sensing = m.sensing.saturating_add(cm.sensing);
                m.leaves = m.leaves.saturating_add(cm.leaves);
            }
            memo[n.index()] = Some(m);
        }
        let m = memo[root.index()].unwrap_or_default();
        PlanStats {
            tree_size: m.tree,
            dag_size: order.len() as u64,
            max_depth: m.depth,
            sensing_nodes: m.sensing,
            leaves: m.leaves,
        }
    }

    /// Copy holding only reachable nodes, numbered in preorder.
    pub fn compact(&self) -> ConditionalPlan {
        let order = self.preorder();
        let mut remap = vec![u32::MAX; self.nodes.len()];
        for (k, n) in order.iter().enumerate() {
            remap[n.index()] = k as u32;
        }
        let map = |n: NodeId| NodeId(remap[n.index()]);
        let nodes = order
            .iter()
            .map(|&n| match self.node(n) {
                PlanNode::Act { actions, child } => PlanNode::Act {
                    actions: actions.clone(),
                    child: child.map(map),
                },
                PlanNode::Sense { sensing, edges } => PlanNode::Sense {
                    sensing: *sensing,
                    edges: edges.iter().map(|&(v, c)| (v, map(c))).collect(),
                },
            })
            .collect();
        ConditionalPlan {
            nodes,
            root: self.root.map(|_| NodeId(0)),
        }
    }

    /// Removes the last outcome edge of the first sensing node (preorder).
    pub fn mutate_drop_edge(&self) -> Option<ConditionalPlan> {
        let mut p = self.clone();
        let target = self
            .preorder()
            .into_iter()
            .find(|&n| matches!(self.node(n), PlanNode::Sense { edges, .. } if !edges.is_empty()))?;
        if let PlanNode::Sense { edges, .. } = p.node_mut(target) {
            edges.pop();
        }
        Some(p)
    }

    /// Exchanges the outcome labels of the first two edges that lead to
    /// different nodes, at the first sensing node that has such a pair.
    pub fn mutate_swap_outcomes(&self) -> Option<ConditionalPlan> {
        let mut p = self.clone();
        for n in self.preorder() {
            if let PlanNode::Sense { edges, .. } = self.node(n) {
                if let Some(j) = (1..edges.len()).find(|&j| edges[j].1 != edges[0].1) {
                    if let PlanNode::Sense { edges, .. } = p.node_mut(n) {
                        let (a, b) = (edges[0].0, edges[j].0);
                        edges[0].0 = b;
                        edges[j].0 = a;
                    }
                    return Some(p);
                }
            }
        }
        None
    }

    /// Cuts the branch below the first actuation node that has a child.
    /// When every actuation node is a leaf, the first one loses its
    /// actions instead, so its branch stops one step early.
    pub fn mutate_truncate(&self) -> Option<ConditionalPlan> {
        let mut p = self.clone();
        let order = self.preorder();
        if let Some(&target) = order
            .iter()
            .find(|&&n| matches!(self.node(n), PlanNode::Act { child: Some(_), .. }))
        {
            if let PlanNode::Act { child, .. } = p.node_mut(target) {
                *child = None;
            }
            return Some(p);
        }
        let leaf = order
            .into_iter()
            .find(|&n| matches!(self.node(n), PlanNode::Act { actions, .. } if !actions.is_empty()))?;
        if let PlanNode::Act { actions, .. } = p.node_mut(leaf) {
            actions.clear();
        }
        Some(p)
    }
}
