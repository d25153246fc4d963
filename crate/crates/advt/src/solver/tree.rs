//! Belief-tree arena.
//!
//! Nodes live in a flat vector and reference each other by index, which keeps
//! the borrow checker out of the search loop and makes dropping whole
//! subtrees (on re-rooting) a straightforward copy-compact pass. Every node
//! owns its weighted particle set and, once expanded, the Voronoi tree that
//! discretizes its action space. Action edges own their observation children
//! in creation order; all tie-breaking in the solver relies on that order, so
//! no hash maps appear anywhere near the search path.

use crate::pomdp::{State, WeightedBelief};
use crate::vtree::{VNodeId, VoronoiTree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BeliefId(pub(crate) u32);

impl BeliefId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Observation edge key. Discrete observations are compared by code;
/// continuous observations are distinct keys by construction (each adopted
/// observation becomes its own child), so the stored vector is only kept to
/// replay the observation when an edge is revisited.
#[derive(Clone, Debug, PartialEq)]
pub enum ObsKey {
    Discrete(i64),
    Continuous(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct ActionEdge {
    pub action: Vec<f64>,
    /// Leaf of the owning node's Voronoi tree housing this action.
    pub vnode: VNodeId,
    /// N(b, a).
    pub visits: u64,
    /// Running value estimate Q(b, a).
    pub q: f64,
    /// Observation children in creation order.
    pub children: Vec<(ObsKey, BeliefId)>,
}

impl ActionEdge {
    pub fn new(action: Vec<f64>, vnode: VNodeId) -> Self {
        Self { action, vnode, visits: 0, q: 0.0, children: Vec::new() }
    }

    pub fn child_by_code(&self, code: i64) -> Option<BeliefId> {
        self.children.iter().find_map(|(k, b)| match k {
            ObsKey::Discrete(c) if *c == code => Some(*b),
            _ => None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BeliefNode {
    pub belief: WeightedBelief,
    /// Total particles ever offered to this node (reservoir bookkeeping).
    pub seen: u64,
    /// N(b).
    pub visits: u64,
    /// V*(b). Holds the rollout heuristic until the first backup.
    pub value: f64,
    pub vtree: Option<VoronoiTree>,
    pub edges: Vec<ActionEdge>,
    /// Index of the edge currently attaining V*(b), if any backup ran.
    pub best_edge: Option<u32>,
    pub parent: Option<BeliefId>,
}

impl BeliefNode {
    pub fn new(parent: Option<BeliefId>) -> Self {
        Self {
            belief: WeightedBelief::new(),
            seen: 0,
            visits: 0,
            value: 0.0,
            vtree: None,
            edges: Vec::new(),
            best_edge: None,
            parent,
        }
    }

    /// Uniform reservoir insert for unweighted particles: keeps the stored
    /// set a uniform subsample of everything offered once the cap is hit.
    pub fn insert_unweighted(&mut self, state: State, cap: usize, rng: &mut ChaCha8Rng) {
        self.seen += 1;
        if self.belief.len() < cap {
            self.belief.push(state, 1.0);
        } else {
            let j = rng.gen_range(0..self.seen);
            if (j as usize) < cap {
                self.belief.replace(j as usize, state, 1.0);
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct BeliefTree {
    pub(crate) nodes: Vec<BeliefNode>,
}

impl BeliefTree {
    pub fn with_root(root: BeliefNode) -> Self {
        Self { nodes: vec![root] }
    }

    pub fn root() -> BeliefId {
        BeliefId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: BeliefId) -> &BeliefNode {
        &self.nodes[id.index()]
    }

    pub fn get_mut(&mut self, id: BeliefId) -> &mut BeliefNode {
        &mut self.nodes[id.index()]
    }

    pub fn push(&mut self, node: BeliefNode) -> BeliefId {
        let id = BeliefId(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    /// Re-roots the tree at `new_root`, dropping every node outside its
    /// subtree and compacting the arena. Returns the new tree.
    pub fn promote(mut self, new_root: BeliefId) -> BeliefTree {
        let mut old: Vec<Option<BeliefNode>> = self.nodes.drain(..).map(Some).collect();
        let mut order = vec![new_root];
        let mut remap = vec![u32::MAX; old.len()];
        remap[new_root.index()] = 0;
        let mut i = 0;
        while i < order.len() {
            let id = order[i];
            i += 1;
            for edge in &old[id.index()].as_ref().expect("node visited once").edges {
                for (_, child) in &edge.children {
                    remap[child.index()] = order.len() as u32;
                    order.push(*child);
                }
            }
        }
        let mut nodes = Vec::with_capacity(order.len());
        for (new_idx, id) in order.iter().enumerate() {
            let mut node = old[id.index()].take().expect("subtree nodes are distinct");
            node.parent = if new_idx == 0 {
                None
            } else {
                node.parent.map(|p| BeliefId(remap[p.index()]))
            };
            for edge in &mut node.edges {
                for (_, child) in &mut edge.children {
                    *child = BeliefId(remap[child.index()]);
                }
            }
            nodes.push(node);
        }
        BeliefTree { nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn s1(x: f64) -> State {
        State::new(vec![x])
    }

    #[test]
    fn reservoir_keeps_cap_and_counts() {
        let mut node = BeliefNode::new(None);
        let mut rng = stream_rng(30, 0);
        for i in 0..100 {
            node.insert_unweighted(s1(i as f64), 16, &mut rng);
        }
        assert_eq!(node.belief.len(), 16);
        assert_eq!(node.seen, 100);
        assert!((node.belief.total_weight() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn reservoir_subsample_is_roughly_uniform() {
        // Offer 0..200 repeatedly; the kept fraction from the first half
        // should hover near 1/2.
        let mut early = 0usize;
        for seed in 0..50 {
            let mut node = BeliefNode::new(None);
            let mut rng = stream_rng(31, seed);
            for i in 0..200 {
                node.insert_unweighted(s1(i as f64), 32, &mut rng);
            }
            early += node
                .belief
                .particles()
                .iter()
                .filter(|(s, _)| s.values[0] < 100.0)
                .count();
        }
        let frac = early as f64 / (50.0 * 32.0);
        assert!((0.42..=0.58).contains(&frac), "frac = {frac}");
    }

    #[test]
    fn promote_keeps_subtree_and_drops_rest() {
        let mut tree = BeliefTree::with_root(BeliefNode::new(None));
        let root = BeliefTree::root();
        // root --edge0--> a, b ; a --edge0--> c
        let a = tree.push(BeliefNode::new(Some(root)));
        let b = tree.push(BeliefNode::new(Some(root)));
        let mut edge = ActionEdge::new(vec![0.0], VoronoiTree::root());
        edge.children.push((ObsKey::Discrete(0), a));
        edge.children.push((ObsKey::Discrete(1), b));
        tree.get_mut(root).edges.push(edge);

        let c = tree.push(BeliefNode::new(Some(a)));
        let mut edge_a = ActionEdge::new(vec![1.0], VoronoiTree::root());
        edge_a.children.push((ObsKey::Discrete(7), c));
        tree.get_mut(a).edges.push(edge_a);
        tree.get_mut(c).visits = 99;

        let promoted = tree.promote(a);
        assert_eq!(promoted.len(), 2);
        let new_root = promoted.get(BeliefTree::root());
        assert!(new_root.parent.is_none());
        let (key, child) = &new_root.edges[0].children[0];
        assert_eq!(*key, ObsKey::Discrete(7));
        assert_eq!(promoted.get(*child).visits, 99);
        assert_eq!(promoted.get(*child).parent, Some(BeliefTree::root()));
    }
}
