//! The online planner: anytime Monte Carlo tree search over beliefs with
//! adaptive Voronoi-tree action discretization.
//!
//! One planning call interleaves four operations until the budget runs out:
//!
//! 1. **Episode sampling** walks the belief tree from the root, picking the
//!    candidate action maximizing the cell-diameter-aware upper confidence
//!    bound `U(b,a) = Q(b,a) + C sqrt(ln N(b) / N(b,a)) + L diam(P)`
//!    (unvisited candidates score infinity), stepping the generative model,
//!    and descending through the observation edge. The walk stops at a
//!    terminal state or at a freshly expanded belief, whose value is seeded
//!    by a rollout heuristic.
//! 2. **Backups** run the episode bottom-up. The default is a stochastic
//!    Bellman backup, moving `Q(b,a)` toward `r + gamma * V*(b')` by a
//!    `1/N(b,a)` step and then restoring `V*(b) = max_a Q(b,a)`; the
//!    Monte-Carlo mode replaces `V*(b')` with the episode's own discounted
//!    tail return.
//! 3. **Refinement** may split the leaf cell of the action just backed up:
//!    cell `P` splits once `C_r N(b,a) >= 1 / diam(P)^2`, so large cells
//!    split after few visits and small cells need many.
//! 4. **Observation handling** keys children by observation code in discrete
//!    domains. Continuous domains use progressive widening: a fresh
//!    observation is adopted only while `|O(b,a)| < max(1, k_o N(b,a)^a_o)`,
//!    otherwise an existing child is revisited; particles are reweighted by
//!    the observation density and the episode state is resampled from the
//!    child belief.
//!
//! Between executed steps the planner re-roots: discrete domains keep the
//! subtree under the executed action and perceived observation (statistics
//! and partitions intact, refinement keeps running), continuous domains
//! rebuild the root belief by filtering the particles through the executed
//! action and start a fresh tree.

mod tree;

pub use tree::{ActionEdge, BeliefId, BeliefNode, BeliefTree, ObsKey};

use crate::geometry::ActionSpace;
use crate::pomdp::{Action, Episode, Observation, ObservationKind, PomdpModel, State, WeightedBelief};
use crate::rng::stream_rng;
use crate::vtree::{PartitionMode, SplitParams, VoronoiTree};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use thiserror::Error;

/// Stream indices for deterministic RNG derivation (see [`crate::rng`]).
const STREAM_ROOT_BELIEF: u64 = 0;
const STREAM_MISC: u64 = 1;
const STREAM_EPISODE_BASE: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackupMode {
    /// Stochastic Bellman backup: target `r + gamma * V*(b')`.
    Bellman,
    /// Monte-Carlo backup: target `r + gamma * (episode tail return)`.
    MonteCarlo,
}

/// Per-step planning budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    /// Fixed number of sampled episodes; fully deterministic.
    Episodes(u64),
    /// Wall-clock planning time in milliseconds.
    WallClockMs(u64),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// UCB exploration constant C.
    pub ucb_c: f64,
    /// Lipschitz constant L scaling the cell-diameter bonus.
    pub lipschitz: f64,
    /// Drop the `L diam(P)` term entirely (the L=0 ablation).
    pub l_zero: bool,
    /// Refinement constant C_r.
    pub refine_c: f64,
    /// Boundary points per cell for diameter estimation (k).
    pub boundary_samples: usize,
    /// Bisection tolerance as a fraction of diam(A).
    pub bisect_eps_frac: f64,
    /// Hit-and-run walk length (m).
    pub hit_and_run_steps: usize,
    /// Observation progressive-widening scale k_o (continuous spaces).
    pub widen_k: f64,
    /// Observation progressive-widening exponent alpha_o.
    pub widen_alpha: f64,
    /// Discount factor.
    pub discount: f64,
    pub backup: BackupMode,
    pub partition: PartitionMode,
    pub budget: Budget,
    /// Particles drawn for the initial root belief.
    pub root_particles: usize,
    /// Reservoir cap for per-node visit particles (discrete domains).
    pub particle_cap: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ucb_c: 1.0,
            lipschitz: 1.0,
            l_zero: false,
            refine_c: 1.0,
            boundary_samples: 30,
            bisect_eps_frac: 1e-3,
            hit_and_run_steps: 10,
            widen_k: 5.0,
            widen_alpha: 0.1,
            discount: 0.95,
            backup: BackupMode::Bellman,
            partition: PartitionMode::Voronoi,
            budget: Budget::Episodes(1000),
            root_particles: 1000,
            particle_cap: 8192,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn split_params(&self, space: &ActionSpace) -> SplitParams {
        SplitParams {
            boundary_samples: self.boundary_samples,
            eps: (self.bisect_eps_frac * space.diameter()).max(1e-12),
            hit_and_run_steps: self.hit_and_run_steps,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("planning budget produced no usable episode (no root action visited)")]
    NoEpisodes,
    #[error("root belief is degenerate ({0} particles, total weight {1})")]
    DegenerateRoot(usize, f64),
    #[error("executed action is not a candidate at the root")]
    UnknownAction,
    #[error("perceived observation kind does not match the model's observation space")]
    ObservationKindMismatch,
    #[error("belief depleted: no particle survived filtering through the executed action and perceived observation")]
    BeliefDepleted,
}

/// Counters exposed for instrumented runs.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchStats {
    pub episodes: u64,
    /// Episodes dropped because a child belief degenerated to zero weight.
    pub aborted_episodes: u64,
    pub splits: u64,
    /// Violations of the progressive-widening bound (always checked).
    pub widen_violations: u64,
    /// Negative / non-finite observation densities reported by the model.
    pub bad_densities: u64,
}

/// Upper-confidence score for one candidate: `U(b,a) = Q + C sqrt(ln N(b) /
/// N(b,a)) + L diam(P)`, infinite while the candidate is unvisited.
pub fn ucb_value(q: f64, n_b: u64, n_ba: u64, c: f64, l: f64, diam: f64) -> f64 {
    if n_ba == 0 {
        return f64::INFINITY;
    }
    let explore = ((n_b as f64).ln() / n_ba as f64).sqrt();
    q + c * explore + l * diam
}

/// Progressive-widening cap on observation children: `max(1, k_o * N^a_o)`.
/// A fresh observation is adopted only while `|O(b,a)|` is strictly below
/// this, which keeps `|O(b,a)| <= max(1, ceil(k_o * N^a_o))` at all times.
pub fn widen_limit(widen_k: f64, widen_alpha: f64, n_ba: u64) -> f64 {
    (widen_k * (n_ba as f64).powf(widen_alpha)).max(1.0)
}

struct EpisodeOutcome {
    episode: Episode,
    deepest: BeliefId,
    /// `(node, edge index, reward)` per executed step, root first.
    path: Vec<(BeliefId, u32, f64)>,
    new_belief: bool,
    aborted: bool,
}

/// Single-threaded planner owning one belief tree. Parallelism belongs one
/// level up: run several planners on independent seeds, never share one.
pub struct Planner<'a, M: PomdpModel + ?Sized> {
    model: &'a M,
    cfg: SolverConfig,
    split: SplitParams,
    tree: BeliefTree,
    episodes_started: u64,
    misc_rng: ChaCha8Rng,
    stats: SearchStats,
}

impl<'a, M: PomdpModel + ?Sized> Planner<'a, M> {
    /// Builds a planner with a root belief of `root_particles` draws from
    /// the model's initial-belief sampler.
    pub fn new(model: &'a M, cfg: SolverConfig) -> Result<Self, SolverError> {
        let mut init_rng = stream_rng(cfg.seed, STREAM_ROOT_BELIEF);
        let mut root = BeliefNode::new(None);
        for _ in 0..cfg.root_particles.max(1) {
            root.belief.push(model.sample_initial_state(&mut init_rng), 1.0);
            root.seen += 1;
        }
        Self::with_root_belief(model, cfg, root.belief)
    }

    /// Builds a planner over an explicit root belief.
    pub fn with_root_belief(
        model: &'a M,
        cfg: SolverConfig,
        belief: WeightedBelief,
    ) -> Result<Self, SolverError> {
        if belief.is_empty() || belief.total_weight() <= 0.0 {
            return Err(SolverError::DegenerateRoot(belief.len(), belief.total_weight()));
        }
        let split = cfg.split_params(model.action_space());
        let mut root = BeliefNode::new(None);
        root.seen = belief.len() as u64;
        root.belief = belief;
        Ok(Self {
            misc_rng: stream_rng(cfg.seed, STREAM_MISC),
            model,
            cfg,
            split,
            tree: BeliefTree::with_root(root),
            episodes_started: 0,
            stats: SearchStats::default(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn root(&self) -> BeliefId {
        BeliefTree::root()
    }

    pub fn tree(&self) -> &BeliefTree {
        &self.tree
    }

    pub fn root_belief(&self) -> &WeightedBelief {
        &self.tree.get(BeliefTree::root()).belief
    }

    /// Runs episodes until the budget is exhausted and returns the candidate
    /// with the highest Q among root actions visited at least once
    /// (first-created wins ties).
    pub fn plan(&mut self) -> Result<Action, SolverError> {
        self.ensure_vtree(BeliefTree::root());
        match self.cfg.budget {
            Budget::Episodes(n) => {
                for _ in 0..n {
                    self.run_one_iteration();
                }
            }
            Budget::WallClockMs(ms) => {
                let start = Instant::now();
                let budget = std::time::Duration::from_millis(ms);
                while start.elapsed() < budget {
                    self.run_one_iteration();
                }
            }
        }
        self.best_root_action().ok_or(SolverError::NoEpisodes)
    }

    /// The current best root action, if any candidate has been visited.
    pub fn best_root_action(&self) -> Option<Action> {
        let root = self.tree.get(BeliefTree::root());
        let mut best: Option<(f64, &ActionEdge)> = None;
        for edge in &root.edges {
            if edge.visits == 0 {
                continue;
            }
            if best.map_or(true, |(bq, _)| edge.q > bq) {
                best = Some((edge.q, edge));
            }
        }
        best.map(|(_, e)| e.action.clone())
    }

    fn run_one_iteration(&mut self) {
        let mut rng = stream_rng(self.cfg.seed, STREAM_EPISODE_BASE + self.episodes_started);
        self.episodes_started += 1;
        self.stats.episodes += 1;
        let outcome = self.run_episode(&mut rng, false);
        if !outcome.aborted {
            self.backup_pass(&outcome, &mut rng);
        } else {
            self.stats.aborted_episodes += 1;
        }
    }

    /// Samples one episode from the root without backing it up; exposed for
    /// tests and instrumentation. `plan` drives the same walk internally.
    pub fn sample_episode(&mut self, rng: &mut ChaCha8Rng) -> (Episode, BeliefId) {
        self.ensure_vtree(BeliefTree::root());
        let outcome = self.run_episode(rng, true);
        (outcome.episode, outcome.deepest)
    }

    fn run_episode(&mut self, rng: &mut ChaCha8Rng, record: bool) -> EpisodeOutcome {
        let mut episode = Episode::new();
        let mut path: Vec<(BeliefId, u32, f64)> = Vec::with_capacity(16);
        let mut b = BeliefTree::root();
        let mut state = match self.tree.get(b).belief.sample(rng) {
            Ok(s) => s.clone(),
            Err(_) => {
                // Degenerate root: yield an empty, aborted episode.
                return EpisodeOutcome {
                    episode,
                    deepest: b,
                    path,
                    new_belief: false,
                    aborted: true,
                };
            }
        };
        let mut new_belief = false;
        while !new_belief && !self.model.is_terminal(&state) {
            let edge_idx = self.select_action(b);
            let step = match self.step_sim(b, &state, edge_idx, rng) {
                Some(s) => s,
                None => {
                    // Child belief degenerated: drop the episode, no backup.
                    return EpisodeOutcome {
                        episode,
                        deepest: b,
                        path,
                        new_belief: false,
                        aborted: true,
                    };
                }
            };
            if record {
                episode.push(
                    state.clone(),
                    self.tree.get(b).edges[edge_idx as usize].action.clone(),
                    step.observation.clone(),
                    step.reward,
                );
            }
            path.push((b, edge_idx, step.reward));
            {
                let node = self.tree.get_mut(b);
                node.visits += 1;
                node.edges[edge_idx as usize].visits += 1;
            }
            if self.tree.get(step.child).vtree.is_none() {
                self.ensure_vtree(step.child);
                new_belief = true;
            }
            state = step.next_state;
            b = step.child;
        }
        if new_belief {
            let h = {
                let node = self.tree.get(b);
                self.model.rollout_heuristic(&state, &node.belief, rng)
            };
            self.tree.get_mut(b).value = h;
        }
        episode.push_terminal(state, 0.0);
        EpisodeOutcome { episode, deepest: b, path, new_belief, aborted: false }
    }

    /// Candidate with the maximal upper-confidence score; the first
    /// unvisited candidate (creation order) wins outright since its score is
    /// infinite.
    fn select_action(&self, b: BeliefId) -> u32 {
        let node = self.tree.get(b);
        let vt = node.vtree.as_ref().expect("selection requires an initialized partition");
        let n_b = node.visits;
        let l = if self.cfg.l_zero { 0.0 } else { self.cfg.lipschitz };
        let mut best = 0u32;
        let mut best_u = f64::NEG_INFINITY;
        for (i, edge) in node.edges.iter().enumerate() {
            if edge.visits == 0 {
                return i as u32;
            }
            let u = ucb_value(edge.q, n_b, edge.visits, self.cfg.ucb_c, l, vt.diameter(edge.vnode));
            if u > best_u {
                best_u = u;
                best = i as u32;
            }
        }
        best
    }

    fn ensure_vtree(&mut self, b: BeliefId) {
        if self.tree.get(b).vtree.is_some() {
            return;
        }
        let vt = VoronoiTree::init(
            self.model.action_space(),
            self.cfg.partition,
            &self.split,
            &mut self.misc_rng,
        );
        let edge = ActionEdge::new(vt.rep(VoronoiTree::root()).to_vec(), VoronoiTree::root());
        let node = self.tree.get_mut(b);
        node.vtree = Some(vt);
        node.edges.push(edge);
    }
}

struct SimStep {
    child: BeliefId,
    next_state: State,
    observation: Observation,
    reward: f64,
}

impl<'a, M: PomdpModel + ?Sized> Planner<'a, M> {
    /// One generative step through an action edge (the tree-descent move).
    /// Returns `None` when the reached child belief has zero total weight,
    /// which aborts the episode without backup.
    fn step_sim(
        &mut self,
        b: BeliefId,
        state: &State,
        edge_idx: u32,
        rng: &mut ChaCha8Rng,
    ) -> Option<SimStep> {
        let action = self.tree.get(b).edges[edge_idx as usize].action.clone();
        let t = self.model.step(state, &action, rng);
        match self.model.observation_kind() {
            ObservationKind::Discrete => {
                let code = t
                    .observation
                    .code()
                    .expect("discrete-observation model produced a continuous observation");
                let child = match self.tree.get(b).edges[edge_idx as usize].child_by_code(code) {
                    Some(c) => c,
                    None => {
                        let c = self.tree.push(BeliefNode::new(Some(b)));
                        self.tree.get_mut(b).edges[edge_idx as usize]
                            .children
                            .push((ObsKey::Discrete(code), c));
                        c
                    }
                };
                let cap = self.cfg.particle_cap;
                self.tree.get_mut(child).insert_unweighted(t.next_state.clone(), cap, rng);
                Some(SimStep {
                    child,
                    next_state: t.next_state,
                    observation: t.observation,
                    reward: t.reward,
                })
            }
            ObservationKind::Continuous => {
                let n_ba = self.tree.get(b).edges[edge_idx as usize].visits;
                let n_children = self.tree.get(b).edges[edge_idx as usize].children.len();
                let adopt = (n_children as f64) < widen_limit(self.cfg.widen_k, self.cfg.widen_alpha, n_ba);
                let (observation, child) = if adopt {
                    let c = self.tree.push(BeliefNode::new(Some(b)));
                    let key = match &t.observation {
                        Observation::Continuous(v) => ObsKey::Continuous(v.clone()),
                        Observation::Discrete(code) => ObsKey::Discrete(*code),
                    };
                    self.tree.get_mut(b).edges[edge_idx as usize].children.push((key, c));
                    (t.observation.clone(), c)
                } else {
                    let j = rng.gen_range(0..n_children);
                    let (key, c) = &self.tree.get(b).edges[edge_idx as usize].children[j];
                    let obs = match key {
                        ObsKey::Continuous(v) => Observation::Continuous(v.clone()),
                        ObsKey::Discrete(code) => Observation::Discrete(*code),
                    };
                    (obs, *c)
                };
                // Widening bound must hold after any insertion.
                let cap = widen_limit(self.cfg.widen_k, self.cfg.widen_alpha, n_ba).ceil();
                if self.tree.get(b).edges[edge_idx as usize].children.len() as f64 > cap {
                    self.stats.widen_violations += 1;
                }

                let w = self.model.observation_density(&t.next_state, &action, &observation);
                if !(w.is_finite() && w >= 0.0) {
                    self.stats.bad_densities += 1;
                    return None;
                }
                let node = self.tree.get_mut(child);
                node.belief.push(t.next_state, w);
                node.seen += 1;
                if node.belief.total_weight() <= 0.0 {
                    return None;
                }
                let next_state = node.belief.sample(rng).ok()?.clone();
                let reward = self.model.reward(state, &action, &next_state);
                Some(SimStep { child, next_state, observation, reward })
            }
        }
    }

    /// Bottom-up value propagation plus refinement along the episode path.
    fn backup_pass(&mut self, outcome: &EpisodeOutcome, rng: &mut ChaCha8Rng) {
        let mut child = outcome.deepest;
        // Tail return of the episode below the current edge; seeds the
        // Monte-Carlo target. A freshly expanded leaf contributes its
        // heuristic value, a terminal end contributes nothing.
        let mut tail = if outcome.new_belief { self.tree.get(outcome.deepest).value } else { 0.0 };
        let gamma = self.cfg.discount;
        for &(b, edge_idx, reward) in outcome.path.iter().rev() {
            let bootstrap = match self.cfg.backup {
                BackupMode::Bellman => self.tree.get(child).value,
                BackupMode::MonteCarlo => tail,
            };
            let target = reward + gamma * bootstrap;
            {
                let node = self.tree.get_mut(b);
                let edge = &mut node.edges[edge_idx as usize];
                debug_assert!(edge.visits > 0, "backup before visit increment");
                edge.q += (target - edge.q) / edge.visits as f64;
            }
            self.refresh_value(b, edge_idx);
            self.maybe_refine(b, edge_idx, rng);
            tail = reward + gamma * tail;
            child = b;
        }
    }

    /// Restores `V*(b) = max_a Q(b, a)` over visited candidates after the
    /// edge `updated` changed, rescanning only when the previous maximizer
    /// lost value.
    fn refresh_value(&mut self, b: BeliefId, updated: u32) {
        let node = self.tree.get_mut(b);
        let q = node.edges[updated as usize].q;
        match node.best_edge {
            Some(best) if best != updated => {
                if q > node.value {
                    node.value = q;
                    node.best_edge = Some(updated);
                }
            }
            Some(_) if q >= node.value => {
                node.value = q;
            }
            _ => {
                let mut best = None;
                let mut best_q = f64::NEG_INFINITY;
                for (i, e) in node.edges.iter().enumerate() {
                    if e.visits > 0 && e.q > best_q {
                        best_q = e.q;
                        best = Some(i as u32);
                    }
                }
                if let Some(i) = best {
                    node.value = best_q;
                    node.best_edge = Some(i);
                }
            }
        }
    }

    /// Splits the leaf cell of `edge` once `C_r N(b,a) >= 1 / diam(P)^2`.
    /// Zero-diameter cells never split. The inheriting child keeps this
    /// edge's statistics; the new representative starts a fresh edge whose
    /// first selection is forced by its infinite UCB score.
    fn maybe_refine(&mut self, b: BeliefId, edge_idx: u32, rng: &mut ChaCha8Rng) {
        let node = self.tree.get(b);
        let edge = &node.edges[edge_idx as usize];
        let vt = node.vtree.as_ref().expect("refinement requires a partition");
        let diam = vt.diameter(edge.vnode);
        if diam <= 0.0 {
            return;
        }
        if self.cfg.refine_c * (edge.visits as f64) < 1.0 / (diam * diam) {
            return;
        }
        let leaf = edge.vnode;
        let space = self.model.action_space();
        let node = self.tree.get_mut(b);
        let vt = node.vtree.as_mut().expect("refinement requires a partition");
        if let Some((inherit, fresh)) = vt.split(space, leaf, &self.split, rng) {
            vt.set_edge(inherit, edge_idx as usize);
            node.edges[edge_idx as usize].vnode = inherit;
            let new_idx = node.edges.len();
            let new_edge = ActionEdge::new(vt.rep(fresh).to_vec(), fresh);
            vt.set_edge(fresh, new_idx);
            node.edges.push(new_edge);
            self.stats.splits += 1;
        }
    }

    /// Advances the tree after executing `executed` in the environment and
    /// perceiving `perceived`.
    ///
    /// Discrete observation spaces re-use the planned subtree: the child
    /// under `(executed, perceived)` becomes the root with statistics and
    /// partitions intact (created by rejection filtering when the search
    /// never sampled that observation), topped up with filtered particles if
    /// sparse. Continuous spaces rebuild: the old root particles are pushed
    /// through the executed action, reweighted by the observation density at
    /// the perceived observation, systematically resampled, and the search
    /// tree starts fresh from the new root.
    pub fn advance_root(
        &mut self,
        executed: &[f64],
        perceived: &Observation,
    ) -> Result<(), SolverError> {
        let root = BeliefTree::root();
        let edge_idx = self
            .tree
            .get(root)
            .edges
            .iter()
            .position(|e| e.action == executed)
            .ok_or(SolverError::UnknownAction)?;
        match self.model.observation_kind() {
            ObservationKind::Discrete => {
                let code = perceived.code().ok_or(SolverError::ObservationKindMismatch)?;
                let existing = self.tree.get(root).edges[edge_idx].child_by_code(code);
                // Top up sparse child beliefs by rejection filtering from the
                // old root before the old arena is dropped.
                let have = existing.map_or(0, |c| self.tree.get(c).belief.len());
                let need = self.cfg.root_particles.saturating_sub(have);
                let mut extra: Vec<State> = Vec::with_capacity(need);
                if need > 0 {
                    let root_belief = &self.tree.get(root).belief;
                    let mut attempts = 0usize;
                    let max_attempts = 200 * self.cfg.root_particles;
                    while extra.len() < need && attempts < max_attempts {
                        attempts += 1;
                        let s = match root_belief.sample(&mut self.misc_rng) {
                            Ok(s) => s.clone(),
                            Err(_) => break,
                        };
                        let t = self.model.step(&s, executed, &mut self.misc_rng);
                        if t.observation.code() == Some(code) {
                            extra.push(t.next_state);
                        }
                    }
                }
                let child = match existing {
                    Some(c) => c,
                    None => {
                        if extra.is_empty() {
                            return Err(SolverError::BeliefDepleted);
                        }
                        let c = self.tree.push(BeliefNode::new(Some(root)));
                        self.tree.get_mut(root).edges[edge_idx]
                            .children
                            .push((ObsKey::Discrete(code), c));
                        c
                    }
                };
                if self.tree.get(child).belief.is_empty() && extra.is_empty() {
                    return Err(SolverError::BeliefDepleted);
                }
                let tree = std::mem::take(&mut self.tree);
                self.tree = tree.promote(child);
                let new_root = self.tree.get_mut(BeliefTree::root());
                for s in extra {
                    new_root.belief.push(s, 1.0);
                    new_root.seen += 1;
                }
                Ok(())
            }
            ObservationKind::Continuous => {
                if perceived.vector().is_none() {
                    return Err(SolverError::ObservationKindMismatch);
                }
                let old = self.tree.get(root);
                let mut filtered = WeightedBelief::new();
                for (s, w) in old.belief.particles() {
                    if *w <= 0.0 {
                        continue;
                    }
                    let t = self.model.step(s, executed, &mut self.misc_rng);
                    let z = self.model.observation_density(&t.next_state, executed, perceived);
                    filtered.push(t.next_state, w * z.max(0.0));
                }
                if filtered.total_weight() <= 0.0 {
                    return Err(SolverError::BeliefDepleted);
                }
                let resampled = systematic_resample(
                    &filtered,
                    self.cfg.root_particles.max(1),
                    &mut self.misc_rng,
                );
                let mut node = BeliefNode::new(None);
                node.seen = resampled.len() as u64;
                node.belief = resampled;
                self.tree = BeliefTree::with_root(node);
                Ok(())
            }
        }
    }

    /// Depth-limited text dump of the search tree for debugging and golden
    /// tests: per node the path, counts, value estimate and each candidate's
    /// statistics with its leaf-cell diameter.
    pub fn dump_tree(&self, max_depth: usize) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let mut stack = vec![(BeliefTree::root(), String::from("root"), 0usize)];
        while let Some((id, label, depth)) = stack.pop() {
            let node = self.tree.get(id);
            writeln!(
                out,
                "{}{} n {} v {:.6} particles {}",
                "  ".repeat(depth),
                label,
                node.visits,
                node.value,
                node.belief.len()
            )
            .unwrap();
            if depth >= max_depth {
                continue;
            }
            for (i, edge) in node.edges.iter().enumerate() {
                let diam = node
                    .vtree
                    .as_ref()
                    .map(|vt| vt.diameter(edge.vnode))
                    .unwrap_or(0.0);
                writeln!(
                    out,
                    "{}  a{} {:?} n {} q {:.6} diam {:.6}",
                    "  ".repeat(depth),
                    i,
                    fmt_vec(&edge.action),
                    edge.visits,
                    edge.q,
                    diam
                )
                .unwrap();
                for (key, child) in edge.children.iter().rev() {
                    let tag = match key {
                        ObsKey::Discrete(c) => format!("o={c}"),
                        ObsKey::Continuous(v) => format!("o~{}", fmt_vec(v)),
                    };
                    stack.push((*child, format!("a{i} {tag}"), depth + 1));
                }
            }
        }
        out
    }

    /// Full-tree bookkeeping sweep: `N(b) = sum_a N(b,a)`, every visited
    /// candidate's Q finite, `V*(b) = max` over visited candidates, and the
    /// observation-widening bound on every edge. Returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, node) in self.tree.nodes.iter().enumerate() {
            let edge_sum: u64 = node.edges.iter().map(|e| e.visits).sum();
            if node.visits != edge_sum {
                return Err(format!("node {i}: N(b)={} but sum N(b,a)={edge_sum}", node.visits));
            }
            let mut best: Option<f64> = None;
            for (j, edge) in node.edges.iter().enumerate() {
                if edge.visits > 0 {
                    if !edge.q.is_finite() {
                        return Err(format!("node {i} edge {j}: non-finite Q {}", edge.q));
                    }
                    if best.map_or(true, |b| edge.q > b) {
                        best = Some(edge.q);
                    }
                }
                if self.model.observation_kind() == ObservationKind::Continuous {
                    let cap = widen_limit(self.cfg.widen_k, self.cfg.widen_alpha, edge.visits).ceil();
                    if edge.children.len() as f64 > cap {
                        return Err(format!(
                            "node {i} edge {j}: {} observation children exceed cap {cap}",
                            edge.children.len()
                        ));
                    }
                }
            }
            if let Some(best_q) = best {
                if (node.value - best_q).abs() > 1e-9 {
                    return Err(format!(
                        "node {i}: V*={} but max visited Q={best_q}",
                        node.value
                    ));
                }
            }
        }
        Ok(())
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let inner = v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",");
    format!("[{inner}]")
}

/// Systematic (low-variance) resampling of a weighted belief into `n`
/// unit-weight particles.
pub fn systematic_resample(
    belief: &WeightedBelief,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> WeightedBelief {
    let total = belief.total_weight();
    debug_assert!(total > 0.0);
    let step = total / n as f64;
    let mut u = rng.gen::<f64>() * step;
    let mut out = WeightedBelief::new();
    let mut cum = 0.0;
    let mut iter = belief.particles().iter();
    let mut cur = iter.next();
    for _ in 0..n {
        while let Some((s, w)) = cur {
            if cum + w > u {
                out.push(s.clone(), 1.0);
                break;
            }
            cum += w;
            cur = iter.next();
        }
        if out.len() < n && cur.is_none() {
            // Numerical tail: duplicate the last positive-weight particle.
            if let Some((s, _)) = belief.particles().iter().rev().find(|(_, w)| *w > 0.0) {
                while out.len() < n {
                    out.push(s.clone(), 1.0);
                }
            }
            break;
        }
        u += step;
    }
    out
}
