//! Hierarchical action-space partitions: Voronoi trees and the rectangular
//! ablation variant.
//!
//! A Voronoi tree is a binary space partition of the action space owned by a
//! single belief node. Each node is a pair `(a, P)` of a representative
//! action and an implicit cell; splitting a leaf samples a second action `a'`
//! from the cell and divides it by the two-point Voronoi rule: the inheriting
//! child keeps `a` and the points at least as close to `a` as to `a'`, the
//! new child takes the rest. Cells are never stored explicitly — membership
//! is decided by walking the root path and comparing distances against the
//! sibling representative cached at each split. The leaves therefore always
//! partition the action space exactly (ties go to the earlier-created
//! child).
//!
//! Cell diameters drive both action selection and the refinement rule. They
//! are estimated once, at split time, from a cache of boundary points: each
//! point is found by bisecting from the representative toward a random
//! direction, the parent's cached points are re-used by dividing them among
//! the children, and the smallest enclosing ball of the cache gives the
//! estimate. Estimates are clamped to the parent's value so that diameters
//! are monotone non-increasing along every root path, which the true cell
//! diameters are as well.
//!
//! The rectangular mode replaces the Voronoi rule with axis-aligned halving
//! of explicit hyper-rectangles (longest side, midpoint cut); diameters are
//! then exact box diagonals.

use crate::geometry::{
    boundary_point, dist2, hit_and_run, min_enclosing_ball, ActionSpace, Cell,
};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionMode {
    Voronoi,
    Rectangular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VNodeId(u32);

impl VNodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How a node's cell was carved out of its parent. The root has no test.
#[derive(Clone, Debug)]
enum SplitTest {
    /// `closed` selects the `<=` side of the bisector (the inheriting,
    /// earlier-created child); the other child gets the strict `<` side.
    Voronoi { sibling: Vec<f64>, closed: bool },
    /// `low` selects `q[dim] <= cut`; the sibling gets `q[dim] > cut`.
    Rect { dim: usize, cut: f64, low: bool },
}

#[derive(Clone, Debug)]
struct VNode {
    rep: Vec<f64>,
    parent: Option<VNodeId>,
    children: Option<(VNodeId, VNodeId)>,
    test: Option<SplitTest>,
    diameter: f64,
    /// Boundary-point cache (Voronoi mode; kept on leaves for re-use).
    boundary: Vec<Vec<f64>>,
    /// Explicit box (rectangular mode only).
    rect: Option<(Vec<f64>, Vec<f64>)>,
    /// Index of the owning belief node's action edge while this is a leaf.
    edge: Option<usize>,
}

/// Tunables for splitting: boundary-cache size `k`, bisection tolerance
/// `eps` (absolute) and the hit-and-run walk length `m`.
#[derive(Clone, Copy, Debug)]
pub struct SplitParams {
    pub boundary_samples: usize,
    pub eps: f64,
    pub hit_and_run_steps: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self { boundary_samples: 30, eps: 1e-3, hit_and_run_steps: 10 }
    }
}

/// Membership view of one node's cell; implements [`Cell`] so the geometry
/// samplers can probe it.
pub struct CellView<'a> {
    tree: &'a VoronoiTree,
    space: &'a ActionSpace,
    node: VNodeId,
}

impl Cell for CellView<'_> {
    fn contains(&self, point: &[f64]) -> bool {
        self.tree.contains(self.space, self.node, point)
    }
}

#[derive(Clone, Debug)]
pub struct VoronoiTree {
    nodes: Vec<VNode>,
    mode: PartitionMode,
}

impl VoronoiTree {
    /// Builds a single-node tree covering the whole space: the root pairs a
    /// uniformly sampled action with the full box. The root diameter is the
    /// analytic box diagonal; its boundary cache is seeded with `k` points
    /// sampled directly on the box surface.
    pub fn init(
        space: &ActionSpace,
        mode: PartitionMode,
        params: &SplitParams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let rep = space.sample_uniform(rng);
        let boundary = match mode {
            PartitionMode::Voronoi => (0..params.boundary_samples)
                .map(|_| space.sample_surface(rng))
                .collect(),
            PartitionMode::Rectangular => Vec::new(),
        };
        let rect = match mode {
            PartitionMode::Rectangular => {
                Some((space.lower().to_vec(), space.upper().to_vec()))
            }
            PartitionMode::Voronoi => None,
        };
        let root = VNode {
            rep,
            parent: None,
            children: None,
            test: None,
            diameter: space.diameter(),
            boundary,
            rect,
            edge: Some(0),
        };
        Self { nodes: vec![root], mode }
    }

    pub fn root() -> VNodeId {
        VNodeId(0)
    }

    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rep(&self, id: VNodeId) -> &[f64] {
        &self.nodes[id.index()].rep
    }

    pub fn diameter(&self, id: VNodeId) -> f64 {
        self.nodes[id.index()].diameter
    }

    pub fn parent(&self, id: VNodeId) -> Option<VNodeId> {
        self.nodes[id.index()].parent
    }

    pub fn children(&self, id: VNodeId) -> Option<(VNodeId, VNodeId)> {
        self.nodes[id.index()].children
    }

    pub fn is_leaf(&self, id: VNodeId) -> bool {
        self.nodes[id.index()].children.is_none()
    }

    pub fn edge(&self, id: VNodeId) -> Option<usize> {
        self.nodes[id.index()].edge
    }

    pub fn set_edge(&mut self, id: VNodeId, edge: usize) {
        self.nodes[id.index()].edge = Some(edge);
    }

    pub fn boundary_cache(&self, id: VNodeId) -> &[Vec<f64>] {
        &self.nodes[id.index()].boundary
    }

    pub fn leaves(&self) -> impl Iterator<Item = VNodeId> + '_ {
        (0..self.nodes.len())
            .map(|i| VNodeId(i as u32))
            .filter(|id| self.is_leaf(*id))
    }

    pub fn cell<'a>(&'a self, space: &'a ActionSpace, id: VNodeId) -> CellView<'a> {
        CellView { tree: self, space, node: id }
    }

    /// True iff `query` lies in the cell of `node`: inside the box and, at
    /// every split on the root path, on this node's side of the divider.
    pub fn contains(&self, space: &ActionSpace, node: VNodeId, query: &[f64]) -> bool {
        if !space.contains(query) {
            return false;
        }
        let mut cur = node;
        while let Some(test) = &self.nodes[cur.index()].test {
            let inside = match test {
                SplitTest::Voronoi { sibling, closed } => {
                    let own = dist2(query, &self.nodes[cur.index()].rep);
                    let sib = dist2(query, sibling);
                    if *closed {
                        own <= sib
                    } else {
                        own < sib
                    }
                }
                SplitTest::Rect { dim, cut, low } => {
                    if *low {
                        query[*dim] <= *cut
                    } else {
                        query[*dim] > *cut
                    }
                }
            };
            if !inside {
                return false;
            }
            cur = self.nodes[cur.index()].parent.expect("non-root node has a parent");
        }
        true
    }

    /// The unique leaf whose cell contains `action` (in-bounds actions
    /// only). Descends from the root taking the child whose side test
    /// passes.
    pub fn leaf_of(&self, space: &ActionSpace, action: &[f64]) -> VNodeId {
        debug_assert!(space.contains(action));
        let mut cur = Self::root();
        while let Some((first, second)) = self.nodes[cur.index()].children {
            let test = self.nodes[first.index()]
                .test
                .as_ref()
                .expect("child node has a split test");
            let to_first = match test {
                SplitTest::Voronoi { sibling, closed: _ } => {
                    dist2(action, &self.nodes[first.index()].rep) <= dist2(action, sibling)
                }
                SplitTest::Rect { dim, cut, low: _ } => action[*dim] <= *cut,
            };
            cur = if to_first { first } else { second };
        }
        cur
    }

    /// Splits a leaf, drawing the new representative by hit-and-run inside
    /// the cell (Voronoi mode) or cutting the box (rectangular mode).
    /// Returns the two children `(inheriting, new)`, or `None` when the cell
    /// is too degenerate to split (zero diameter or a coincident draw).
    pub fn split(
        &mut self,
        space: &ActionSpace,
        leaf: VNodeId,
        params: &SplitParams,
        rng: &mut ChaCha8Rng,
    ) -> Option<(VNodeId, VNodeId)> {
        match self.mode {
            PartitionMode::Voronoi => {
                let rep = self.nodes[leaf.index()].rep.clone();
                let cell = self.cell(space, leaf);
                let mut second = hit_and_run(
                    &cell,
                    space,
                    &rep,
                    params.hit_and_run_steps,
                    params.eps,
                    rng,
                );
                space.snap_binary(&mut second);
                // A disconnected binary coordinate gets dedicated cells: the
                // first split of the root separates the two components.
                if let Some(d) = space.forced_first_split_dim() {
                    if leaf == Self::root() {
                        second[d] = if rep[d] == space.lower()[d] {
                            space.upper()[d]
                        } else {
                            space.lower()[d]
                        };
                    }
                }
                self.split_with_action(space, leaf, second, params, rng)
            }
            PartitionMode::Rectangular => self.rect_split(space, leaf, rng),
        }
    }

    /// Voronoi split with an explicitly chosen second representative.
    pub fn split_with_action(
        &mut self,
        space: &ActionSpace,
        leaf: VNodeId,
        second_rep: Vec<f64>,
        params: &SplitParams,
        rng: &mut ChaCha8Rng,
    ) -> Option<(VNodeId, VNodeId)> {
        debug_assert!(self.is_leaf(leaf));
        debug_assert!(self.contains(space, leaf, &second_rep));
        let first_rep = self.nodes[leaf.index()].rep.clone();
        if dist2(&first_rep, &second_rep) < 1e-24 {
            return None;
        }
        let parent_diam = self.nodes[leaf.index()].diameter;

        let c1 = VNodeId(self.nodes.len() as u32);
        let c2 = VNodeId(self.nodes.len() as u32 + 1);
        self.nodes.push(VNode {
            rep: first_rep.clone(),
            parent: Some(leaf),
            children: None,
            test: Some(SplitTest::Voronoi { sibling: second_rep.clone(), closed: true }),
            diameter: 0.0,
            boundary: Vec::new(),
            rect: None,
            edge: None,
        });
        self.nodes.push(VNode {
            rep: second_rep.clone(),
            parent: Some(leaf),
            children: None,
            test: Some(SplitTest::Voronoi { sibling: first_rep.clone(), closed: false }),
            diameter: 0.0,
            boundary: Vec::new(),
            rect: None,
            edge: None,
        });
        self.nodes[leaf.index()].children = Some((c1, c2));

        // Divide the parent's boundary cache between the children by the
        // nearest-representative rule, then top each cache back up to k.
        let parent_cache = std::mem::take(&mut self.nodes[leaf.index()].boundary);
        let (mut cache1, mut cache2): (Vec<_>, Vec<_>) = parent_cache
            .into_iter()
            .partition(|p| dist2(p, &first_rep) <= dist2(p, &second_rep));
        self.top_up_boundary(space, c1, &mut cache1, params, rng);
        self.top_up_boundary(space, c2, &mut cache2, params, rng);

        let d1 = Self::cache_diameter(&cache1).min(parent_diam);
        let d2 = Self::cache_diameter(&cache2).min(parent_diam);
        self.nodes[c1.index()].boundary = cache1;
        self.nodes[c2.index()].boundary = cache2;
        self.nodes[c1.index()].diameter = d1;
        self.nodes[c2.index()].diameter = d2;
        self.nodes[leaf.index()].edge = None;
        Some((c1, c2))
    }

    /// Rectangular-mode split: the box is cut at the midpoint of its longest
    /// cuttable side (ties broken toward the lowest dimension). The child
    /// containing the parent's representative inherits it; the other child
    /// samples its representative uniformly within its half. Diameters are
    /// exact box diagonals.
    pub fn rect_split(
        &mut self,
        space: &ActionSpace,
        leaf: VNodeId,
        rng: &mut ChaCha8Rng,
    ) -> Option<(VNodeId, VNodeId)> {
        debug_assert!(self.is_leaf(leaf));
        let (lo, hi) = self.nodes[leaf.index()].rect.clone().expect("rect mode carries boxes");
        let dim = match self.rect_cut_dim(space, &lo, &hi, leaf) {
            Some(d) => d,
            None => return None, // degenerate box
        };
        let cut = 0.5 * (lo[dim] + hi[dim]);
        let rep = self.nodes[leaf.index()].rep.clone();
        let rep_low = rep[dim] <= cut;

        let mut low_hi = hi.clone();
        low_hi[dim] = cut;
        let mut high_lo = lo.clone();
        high_lo[dim] = cut;
        let low_box = (lo.clone(), low_hi);
        let high_box = (high_lo, hi.clone());
        let (inherit_box, fresh_box) = if rep_low {
            (low_box, high_box)
        } else {
            (high_box, low_box)
        };
        let fresh_rep = Self::sample_in_box(space, &fresh_box.0, &fresh_box.1, rng);

        let c1 = VNodeId(self.nodes.len() as u32);
        let c2 = VNodeId(self.nodes.len() as u32 + 1);
        let diam1 = dist2(&inherit_box.0, &inherit_box.1).sqrt();
        let diam2 = dist2(&fresh_box.0, &fresh_box.1).sqrt();
        self.nodes.push(VNode {
            rep,
            parent: Some(leaf),
            children: None,
            test: Some(SplitTest::Rect { dim, cut, low: rep_low }),
            diameter: diam1,
            boundary: Vec::new(),
            rect: Some(inherit_box),
            edge: None,
        });
        self.nodes.push(VNode {
            rep: fresh_rep,
            parent: Some(leaf),
            children: None,
            test: Some(SplitTest::Rect { dim, cut, low: !rep_low }),
            diameter: diam2,
            boundary: Vec::new(),
            rect: Some(fresh_box),
            edge: None,
        });
        self.nodes[leaf.index()].children = Some((c1, c2));
        self.nodes[leaf.index()].edge = None;
        Some((c1, c2))
    }

    /// Longest cuttable side. Binary dimensions are cuttable only while the
    /// box still spans both of their admissible values, so no box ever ends
    /// up without a valid snapped representative.
    fn rect_cut_dim(
        &self,
        space: &ActionSpace,
        lo: &[f64],
        hi: &[f64],
        leaf: VNodeId,
    ) -> Option<usize> {
        if let Some(d) = space.forced_first_split_dim() {
            if leaf == Self::root() && hi[d] - lo[d] > 0.0 {
                return Some(d);
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for d in 0..space.dim() {
            let w = hi[d] - lo[d];
            if w <= 0.0 {
                continue;
            }
            if space.is_binary_dim(d)
                && !(lo[d] <= space.lower()[d] && hi[d] >= space.upper()[d])
            {
                continue;
            }
            if best.map_or(true, |(_, bw)| w > bw) {
                best = Some((d, w));
            }
        }
        best.map(|(d, _)| d)
    }

    fn sample_in_box(
        space: &ActionSpace,
        lo: &[f64],
        hi: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Vec<f64> {
        use rand::Rng;
        let mut p: Vec<f64> = lo
            .iter()
            .zip(hi)
            .map(|(l, u)| if u > l { rng.gen_range(*l..*u) } else { *l })
            .collect();
        for d in 0..space.dim() {
            if space.is_binary_dim(d) {
                let lo_ok = lo[d] <= space.lower()[d];
                let hi_ok = hi[d] >= space.upper()[d];
                p[d] = match (lo_ok, hi_ok) {
                    (true, true) => {
                        if rng.gen::<bool>() {
                            space.upper()[d]
                        } else {
                            space.lower()[d]
                        }
                    }
                    (true, false) => space.lower()[d],
                    (false, _) => space.upper()[d],
                };
            }
        }
        p
    }

    fn top_up_boundary(
        &self,
        space: &ActionSpace,
        node: VNodeId,
        cache: &mut Vec<Vec<f64>>,
        params: &SplitParams,
        rng: &mut ChaCha8Rng,
    ) {
        let rep = &self.nodes[node.index()].rep;
        let cell = CellView { tree: self, space, node };
        while cache.len() < params.boundary_samples {
            cache.push(boundary_point(&cell, space, rep, params.eps, rng));
        }
    }

    fn cache_diameter(cache: &[Vec<f64>]) -> f64 {
        match min_enclosing_ball(cache) {
            Ok(ball) => ball.diameter(),
            Err(_) => 0.0,
        }
    }

    /// Sampling-based diameter estimate for a node: tops the boundary cache
    /// up to `k` points and returns the smallest-enclosing-ball diameter of
    /// the cache. The estimate is stored on the node.
    pub fn estimate_diameter(
        &mut self,
        space: &ActionSpace,
        node: VNodeId,
        k: usize,
        eps: f64,
        rng: &mut ChaCha8Rng,
    ) -> f64 {
        let mut cache = std::mem::take(&mut self.nodes[node.index()].boundary);
        let params = SplitParams { boundary_samples: k, eps, hit_and_run_steps: 0 };
        self.top_up_boundary(space, node, &mut cache, &params, rng);
        let d = Self::cache_diameter(&cache);
        let node_mut = &mut self.nodes[node.index()];
        node_mut.boundary = cache;
        node_mut.diameter = d;
        d
    }

    /// Text dump for debugging and golden tests: one line per node with id,
    /// parent, representative, diameter and the per-leaf statistics supplied
    /// by `stats(edge) -> (N, Q)`.
    pub fn dump_with<F: Fn(usize) -> (u64, f64)>(&self, stats: F) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let parent = node
                .parent
                .map(|p| p.index().to_string())
                .unwrap_or_else(|| "-".into());
            let rep = node
                .rep
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(",");
            write!(out, "node {i} parent {parent} rep [{rep}] diam {:.6}", node.diameter)
                .unwrap();
            if let Some(e) = node.edge {
                let (n, q) = stats(e);
                write!(out, " n {n} q {q:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn dump(&self) -> String {
        self.dump_with(|_| (0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn params(k: usize, eps: f64) -> SplitParams {
        SplitParams { boundary_samples: k, eps, hit_and_run_steps: 10 }
    }

    #[test]
    fn root_diameter_is_analytic() {
        let mut rng = stream_rng(20, 0);
        let square = ActionSpace::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        let t = VoronoiTree::init(&square, PartitionMode::Voronoi, &params(20, 1e-3), &mut rng);
        assert!((t.diameter(VoronoiTree::root()) - 2.0_f64.sqrt()).abs() < 1e-12);

        let line = ActionSpace::new_box(vec![-1.0], vec![1.0]);
        let t = VoronoiTree::init(&line, PartitionMode::Voronoi, &params(20, 1e-3), &mut rng);
        assert!((t.diameter(VoronoiTree::root()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fresh_tree_has_single_leaf_covering_space() {
        let mut rng = stream_rng(20, 1);
        let space = ActionSpace::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        let t = VoronoiTree::init(&space, PartitionMode::Voronoi, &params(10, 1e-3), &mut rng);
        assert_eq!(t.leaves().count(), 1);
        for _ in 0..100 {
            let q = space.sample_uniform(&mut rng);
            assert_eq!(t.leaf_of(&space, &q), VoronoiTree::root());
            assert!(t.contains(&space, VoronoiTree::root(), &q));
        }
    }

    /// Root at 0 over [-1, 1] split with a' = 0.5: cells [-1, 0.25] and
    /// (0.25, 1], analytic lengths 1.25 and 0.75.
    #[test]
    fn one_dim_split_matches_analytic_midpoint() {
        let mut rng = stream_rng(21, 0);
        let space = ActionSpace::new_box(vec![-1.0], vec![1.0]);
        let p = params(20, 1e-4);
        let mut t = VoronoiTree::init(&space, PartitionMode::Voronoi, &p, &mut rng);
        t.nodes[0].rep = vec![0.0]; // pin the root representative
        let (c1, c2) = t
            .split_with_action(&space, VoronoiTree::root(), vec![0.5], &p, &mut rng)
            .unwrap();

        assert!(t.contains(&space, c1, &[-0.9]));
        assert!(!t.contains(&space, c2, &[-0.9]));
        assert!(t.contains(&space, c2, &[0.3]));
        assert!(!t.contains(&space, c1, &[0.3]));
        // Equidistant point belongs to the first-created child.
        assert!(t.contains(&space, c1, &[0.25]));
        assert!(!t.contains(&space, c2, &[0.25]));

        assert!((t.diameter(c1) - 1.25).abs() < 0.05 * 1.25, "d1 = {}", t.diameter(c1));
        assert!((t.diameter(c2) - 0.75).abs() < 0.05 * 0.75, "d2 = {}", t.diameter(c2));

        assert_eq!(t.leaf_of(&space, &[-0.9]), c1);
        assert_eq!(t.leaf_of(&space, &[0.999]), c2);

        // Boundary caches topped up to exactly k.
        assert_eq!(t.boundary_cache(c1).len(), 20);
        assert_eq!(t.boundary_cache(c2).len(), 20);
        for p in t.boundary_cache(c1) {
            assert!(t.contains(&space, c1, p));
        }
        for p in t.boundary_cache(c2) {
            assert!(t.contains(&space, c2, p));
        }
    }

    #[test]
    fn interval_diameter_estimate_hits_endpoints() {
        let mut rng = stream_rng(22, 0);
        let space = ActionSpace::new_box(vec![-1.0], vec![1.0]);
        let p = params(20, 1e-4);
        let mut t = VoronoiTree::init(&space, PartitionMode::Voronoi, &p, &mut rng);
        t.nodes[0].rep = vec![0.0];
        let (c1, _) = t
            .split_with_action(&space, VoronoiTree::root(), vec![0.5], &p, &mut rng)
            .unwrap();
        // Cell [-1, 0.25]: both endpoints are reachable boundary points.
        let d = t.estimate_diameter(&space, c1, 20, 1e-4, &mut rng);
        assert!((d - 1.25).abs() <= 2.0 * 1e-4, "estimate {d}");
    }

    #[test]
    fn degenerate_cell_estimates_zero() {
        let space = ActionSpace::new_box(vec![0.5], vec![0.5]);
        let mut rng = stream_rng(22, 1);
        let mut t =
            VoronoiTree::init(&space, PartitionMode::Voronoi, &params(10, 1e-5), &mut rng);
        let d = t.estimate_diameter(&space, VoronoiTree::root(), 10, 1e-5, &mut rng);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn partition_stays_exact_under_random_splits() {
        let mut rng = stream_rng(23, 0);
        let space = ActionSpace::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        let p = params(10, 1e-3);
        let mut t = VoronoiTree::init(&space, PartitionMode::Voronoi, &p, &mut rng);
        for _ in 0..100 {
            let leaves: Vec<_> = t.leaves().collect();
            let pick = leaves[rand::Rng::gen_range(&mut rng, 0..leaves.len())];
            t.split(&space, pick, &p, &mut rng);
        }
        let leaves: Vec<_> = t.leaves().collect();
        for _ in 0..1000 {
            let q = space.sample_uniform(&mut rng);
            let hits = leaves.iter().filter(|l| t.contains(&space, **l, &q)).count();
            assert_eq!(hits, 1, "query {q:?} hit {hits} leaves");
            assert!(t.contains(&space, t.leaf_of(&space, &q), &q));
        }
    }

    #[test]
    fn diameters_monotone_along_paths() {
        let mut rng = stream_rng(24, 0);
        let space = ActionSpace::new_box(vec![0.0; 3], vec![1.0; 3]);
        let p = params(20, 1e-3);
        let mut t = VoronoiTree::init(&space, PartitionMode::Voronoi, &p, &mut rng);
        for _ in 0..60 {
            let leaves: Vec<_> = t.leaves().collect();
            let pick = leaves[rand::Rng::gen_range(&mut rng, 0..leaves.len())];
            t.split(&space, pick, &p, &mut rng);
        }
        for id in (0..t.len()).map(|i| VNodeId(i as u32)) {
            if let Some(parent) = t.parent(id) {
                assert!(
                    t.diameter(id) <= t.diameter(parent) + 1e-12,
                    "child {} diam {} > parent {} diam {}",
                    id.index(),
                    t.diameter(id),
                    parent.index(),
                    t.diameter(parent)
                );
            }
        }
    }

    #[test]
    fn split_does_not_touch_rest_of_tree() {
        let mut rng = stream_rng(25, 0);
        let space = ActionSpace::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        let p = params(10, 1e-3);
        let mut t = VoronoiTree::init(&space, PartitionMode::Voronoi, &p, &mut rng);
        for _ in 0..20 {
            let leaves: Vec<_> = t.leaves().collect();
            let pick = leaves[rand::Rng::gen_range(&mut rng, 0..leaves.len())];
            t.split(&space, pick, &p, &mut rng);
        }
        let leaves: Vec<_> = t.leaves().collect();
        let target = *leaves.last().unwrap();
        let before: Vec<String> = (0..t.len())
            .filter(|i| *i != target.index())
            .map(|i| format!("{:?}", t.nodes[i]))
            .collect();
        t.split(&space, target, &p, &mut rng);
        let after: Vec<String> = (0..t.len() - 2)
            .filter(|i| *i != target.index())
            .map(|i| format!("{:?}", t.nodes[i]))
            .collect();
        // All pre-existing nodes other than the split leaf are unchanged.
        assert_eq!(before, after);
    }

    #[test]
    fn rect_split_halves_longest_side() {
        let mut rng = stream_rng(26, 0);
        let space = ActionSpace::new_box(vec![0.0, 0.0], vec![1.0, 2.0]);
        let p = params(10, 1e-3);
        let mut t = VoronoiTree::init(&space, PartitionMode::Rectangular, &p, &mut rng);
        t.nodes[0].rep = vec![0.5, 0.5];
        let (c1, c2) = t.rect_split(&space, VoronoiTree::root(), &mut rng).unwrap();
        // Longest side is dim 1; parent rep y=0.5 lands in the low half.
        assert_eq!(t.nodes[c1.index()].rect.as_ref().unwrap().1[1], 1.0);
        assert_eq!(t.nodes[c2.index()].rect.as_ref().unwrap().0[1], 1.0);
        assert!((t.diameter(c1) - 2.0_f64.sqrt()).abs() < 1e-12);
        // Child of a unit-square half: diagonal sqrt(1.25).
        let (c11, _) = t.rect_split(&space, c1, &mut rng).unwrap();
        assert!((t.diameter(c11) - 1.25_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rect_split_tie_cuts_dim_zero() {
        let mut rng = stream_rng(26, 1);
        let space = ActionSpace::new_box(vec![0.0, 0.0], vec![1.0, 1.0]);
        let mut t =
            VoronoiTree::init(&space, PartitionMode::Rectangular, &params(10, 1e-3), &mut rng);
        let (c1, _) = t.rect_split(&space, VoronoiTree::root(), &mut rng).unwrap();
        match t.nodes[c1.index()].test.as_ref().unwrap() {
            SplitTest::Rect { dim, cut, .. } => {
                assert_eq!(*dim, 0);
                assert_eq!(*cut, 0.5);
            }
            _ => panic!("expected rect test"),
        }
    }

    #[test]
    fn rect_partition_is_exact() {
        let mut rng = stream_rng(27, 0);
        let space = ActionSpace::new_box(vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]);
        let p = params(10, 1e-3);
        let mut t = VoronoiTree::init(&space, PartitionMode::Rectangular, &p, &mut rng);
        for _ in 0..40 {
            let leaves: Vec<_> = t.leaves().collect();
            let pick = leaves[rand::Rng::gen_range(&mut rng, 0..leaves.len())];
            t.split(&space, pick, &p, &mut rng);
        }
        let leaves: Vec<_> = t.leaves().collect();
        for _ in 0..1000 {
            let q = space.sample_uniform(&mut rng);
            let hits = leaves.iter().filter(|l| t.contains(&space, **l, &q)).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn forced_first_split_separates_binary_component() {
        let tau = std::f64::consts::TAU;
        let space =
            ActionSpace::new_box(vec![0.0, 0.0], vec![tau, tau]).with_binary_dim(1, true);
        let mut rng = stream_rng(28, 0);
        let p = params(15, 1e-3);
        let mut t = VoronoiTree::init(&space, PartitionMode::Voronoi, &p, &mut rng);
        let root_bit = t.rep(VoronoiTree::root())[1];
        assert!(root_bit == 0.0 || root_bit == tau);
        let (c1, c2) = t.split(&space, VoronoiTree::root(), &p, &mut rng).unwrap();
        assert_eq!(t.rep(c1)[1], root_bit);
        assert_eq!(t.rep(c2)[1], tau - root_bit);
        // Every query with a given bit value lands in the matching cell.
        for i in 0..100 {
            let angle = tau * (i as f64) / 100.0;
            let q0 = vec![angle, root_bit];
            let q1 = vec![angle, tau - root_bit];
            assert_eq!(t.leaf_of(&space, &q0), c1);
            assert_eq!(t.leaf_of(&space, &q1), c2);
        }
    }
}
