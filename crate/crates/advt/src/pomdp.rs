//! POMDP model contract, weighted-particle beliefs and episode bookkeeping.
//!
//! A problem is described to the planner through [`PomdpModel`]: a black-box
//! generative step `G(s, a) -> (s', o, r)`, an observation density `Z`, an
//! initial-belief sampler, a terminal predicate and an action-space
//! descriptor. States, actions and observations are fixed-length real
//! vectors; states additionally carry an integer tag for domains whose
//! observation depends on a discrete event of the last transition (e.g. a
//! contact flag). Beliefs exist only as weighted particle sets inside the
//! search tree; there is no exact belief update.

use crate::geometry::ActionSpace;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Action vector. Geometry (bounds, metric) lives on [`ActionSpace`].
pub type Action = Vec<f64>;

/// A state: a real vector plus an integer tag.
///
/// The tag defaults to 0 and is only meaningful where a domain documents it
/// (Pushbox stores the contact flag of the last transition there, so that the
/// observation model is a function of the state alone).
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub values: Vec<f64>,
    pub tag: i64,
}

impl State {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, tag: 0 }
    }

    pub fn with_tag(values: Vec<f64>, tag: i64) -> Self {
        Self { values, tag }
    }
}

/// An observation: either a discrete code or a real vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    Discrete(i64),
    Continuous(Vec<f64>),
}

impl Observation {
    pub fn code(&self) -> Option<i64> {
        match self {
            Observation::Discrete(c) => Some(*c),
            Observation::Continuous(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[f64]> {
        match self {
            Observation::Discrete(_) => None,
            Observation::Continuous(v) => Some(v),
        }
    }
}

/// Whether a model's observation space is discrete or continuous. The solver
/// picks its observation-handling strategy from this flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservationKind {
    Discrete,
    Continuous,
}

/// Result of one generative step.
#[derive(Clone, Debug)]
pub struct Transition {
    pub next_state: State,
    pub observation: Observation,
    pub reward: f64,
}

/// The generative-model contract shared by the solver and all domains.
///
/// Implementations must be deterministic given the RNG stream: replaying
/// `step` with an identically seeded generator reproduces `(s', o, r)`
/// bit-for-bit. Models are immutable after construction and safe to share
/// across concurrently running simulations; all randomness flows through the
/// caller-owned generator.
pub trait PomdpModel {
    /// Bounded metric action space the planner discretizes.
    fn action_space(&self) -> &ActionSpace;

    fn observation_kind(&self) -> ObservationKind;

    /// Discount factor, in (0, 1).
    fn discount(&self) -> f64;

    fn sample_initial_state(&self, rng: &mut ChaCha8Rng) -> State;

    /// Generative step `G(s, a) -> (s', o, r)`.
    fn step(&self, state: &State, action: &[f64], rng: &mut ChaCha8Rng) -> Transition;

    /// Observation density/mass `Z(s', a, o)`. Non-negative; sums to one
    /// over all observations for fixed `(s', a)` when the space is discrete.
    fn observation_density(&self, next_state: &State, action: &[f64], obs: &Observation) -> f64;

    /// Reward `R(s, a, s')`. Domains whose reward ignores `s'` simply do so.
    fn reward(&self, state: &State, action: &[f64], next_state: &State) -> f64;

    fn is_terminal(&self, state: &State) -> bool;

    /// Success predicate used by the experiment harness (goal reached, as
    /// opposed to merely terminal).
    fn is_success(&self, state: &State) -> bool {
        let _ = state;
        false
    }

    /// Value estimate for a freshly expanded belief node. Default 0; domains
    /// may override with a cheap rollout.
    fn rollout_heuristic(&self, state: &State, belief: &WeightedBelief, rng: &mut ChaCha8Rng) -> f64 {
        let _ = (state, belief, rng);
        0.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("degenerate belief: {0} particles with total weight {1}")]
    Degenerate(usize, f64),
}

/// A weighted particle set.
#[derive(Clone, Debug, Default)]
pub struct WeightedBelief {
    particles: Vec<(State, f64)>,
    weight_sum: f64,
}

impl WeightedBelief {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an unweighted belief from plain states (weight 1 each).
    pub fn from_states(states: Vec<State>) -> Self {
        let mut b = Self::new();
        for s in states {
            b.push(s, 1.0);
        }
        b
    }

    pub fn push(&mut self, state: State, weight: f64) {
        debug_assert!(weight >= 0.0 && weight.is_finite());
        self.weight_sum += weight;
        self.particles.push((state, weight));
    }

    /// Replaces the particle at `idx`, keeping the weight sum consistent.
    pub fn replace(&mut self, idx: usize, state: State, weight: f64) {
        debug_assert!(weight >= 0.0 && weight.is_finite());
        self.weight_sum += weight - self.particles[idx].1;
        self.particles[idx] = (state, weight);
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weight_sum
    }

    pub fn particles(&self) -> &[(State, f64)] {
        &self.particles
    }

    /// Draws a particle state with probability proportional to its weight.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<&State, BeliefError> {
        if self.particles.is_empty() || self.weight_sum <= 0.0 {
            return Err(BeliefError::Degenerate(self.particles.len(), self.weight_sum));
        }
        let mut u = rng.gen::<f64>() * self.weight_sum;
        for (state, w) in &self.particles {
            u -= w;
            if u < 0.0 {
                return Ok(state);
            }
        }
        // Floating-point slack in the cumulative sum: fall back to the last
        // particle with positive weight.
        self.particles
            .iter()
            .rev()
            .find(|(_, w)| *w > 0.0)
            .map(|(s, _)| s)
            .ok_or(BeliefError::Degenerate(self.particles.len(), self.weight_sum))
    }
}

/// One entry of an episode. Only the final entry of a well-formed episode has
/// `action`/`observation` absent.
#[derive(Clone, Debug)]
pub struct EpisodeStep {
    pub state: State,
    pub action: Option<Action>,
    pub observation: Option<Observation>,
    pub reward: f64,
}

/// A root-to-leaf trajectory of `(state, action, observation, reward)`
/// quadruples sampled by the planner.
#[derive(Clone, Debug, Default)]
pub struct Episode {
    pub steps: Vec<EpisodeStep>,
}

impl Episode {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, state: State, action: Action, observation: Observation, reward: f64) {
        self.steps.push(EpisodeStep {
            state,
            action: Some(action),
            observation: Some(observation),
            reward,
        });
    }

    /// Appends the closing entry `(s, -, -, r)`.
    pub fn push_terminal(&mut self, state: State, reward: f64) {
        self.steps.push(EpisodeStep {
            state,
            action: None,
            observation: None,
            reward,
        });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    /// `sum_t gamma^t r_t` over the episode's rewards in order. Empty
    /// episodes return 0. `gamma = 0` is permitted (only `r_0` survives).
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        discounted_return(self.rewards(), gamma)
    }
}

/// Discounted sum of a reward sequence.
pub fn discounted_return(rewards: impl IntoIterator<Item = f64>, gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut scale = 1.0;
    for r in rewards {
        total += scale * r;
        scale *= gamma;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn s1(x: f64) -> State {
        State::new(vec![x])
    }

    #[test]
    fn single_particle_always_returned() {
        let mut b = WeightedBelief::new();
        b.push(s1(3.0), 1.0);
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(b.sample(&mut rng).unwrap(), &s1(3.0));
        }
    }

    #[test]
    fn zero_weight_particle_never_sampled() {
        let mut b = WeightedBelief::new();
        b.push(s1(1.0), 1.0);
        b.push(s1(2.0), 0.0);
        let mut rng = stream_rng(2, 0);
        for _ in 0..1000 {
            assert_eq!(b.sample(&mut rng).unwrap(), &s1(1.0));
        }
    }

    #[test]
    fn sampling_frequency_matches_weights() {
        // Weights 1:3 -> exact multinomial probability 0.75 for the second
        // particle. With n = 1e5 the binomial 4-sigma band is ~+-0.0055,
        // well inside the asserted [0.74, 0.76] window.
        let mut b = WeightedBelief::new();
        b.push(s1(1.0), 1.0);
        b.push(s1(2.0), 3.0);
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let mut hits = 0usize;
        for _ in 0..n {
            if b.sample(&mut rng).unwrap() == &s1(2.0) {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((0.74..=0.76).contains(&freq), "freq = {freq}");
    }

    #[test]
    fn empty_or_zero_weight_belief_errors() {
        let mut rng = stream_rng(4, 0);
        let empty = WeightedBelief::new();
        assert!(empty.sample(&mut rng).is_err());
        let mut zero = WeightedBelief::new();
        zero.push(s1(0.0), 0.0);
        assert!(zero.sample(&mut rng).is_err());
    }

    #[test]
    fn discounted_return_examples() {
        assert_eq!(discounted_return([1.0, 1.0, 1.0], 0.5), 1.75);
        assert_eq!(discounted_return([], 0.5), 0.0);
        assert_eq!(discounted_return([7.0, 99.0], 0.0), 7.0);
    }

    #[test]
    fn discounted_return_recursion_and_linearity() {
        let rewards = [2.0, -1.0, 0.5, 3.0];
        let gamma = 0.9;
        let head = rewards[0];
        let tail = discounted_return(rewards[1..].iter().copied(), gamma);
        let total = discounted_return(rewards.iter().copied(), gamma);
        assert!((total - (head + gamma * tail)).abs() < 1e-12);

        // Linearity: scaling every reward scales the return.
        let scaled = discounted_return(rewards.iter().map(|r| 2.5 * r), gamma);
        assert!((scaled - 2.5 * total).abs() < 1e-12);
    }

    #[test]
    fn episode_terminal_entry_has_no_action() {
        let mut e = Episode::new();
        e.push(s1(0.0), vec![0.1], Observation::Discrete(0), -1.0);
        e.push_terminal(s1(1.0), 0.0);
        assert_eq!(e.len(), 2);
        assert!(e.steps[0].action.is_some());
        assert!(e.steps[1].action.is_none());
        assert!(e.steps[1].observation.is_none());
        assert!((e.discounted_return(0.5) - -1.0).abs() < 1e-12);
    }
}
