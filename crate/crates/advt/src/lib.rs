//! Online POMDP planning for continuous action spaces.
//!
//! This crate implements an anytime Monte Carlo tree search planner for
//! POMDPs whose action space is a bounded continuum. Each belief node in the
//! search tree owns a *Voronoi tree*: a binary space partition of the action
//! space whose cells are implicitly defined by pairs of sampled actions.
//! Candidate actions are the representatives of the leaf cells; a
//! cell-diameter-aware upper-confidence rule selects among them, a
//! diameter-aware criterion decides when a cell is split further, and value
//! estimates propagate through stochastic Bellman backups (or plain
//! Monte-Carlo backups, as an ablation). Continuous observation spaces are
//! handled with progressive widening over sampled observations plus weighted
//! particle beliefs.
//!
//! The crate ships:
//!
//! - the planner itself ([`solver`]),
//! - the geometric machinery behind the partition ([`geometry`],
//!   [`vtree`]),
//! - six benchmark domains ([`domains`]): Pushbox (2D/3D), Parking (2D/3D),
//!   SensorPlacement (6/8/10/12 joints), Van-der-Pol tag and LunarLander,
//! - a batch experiment harness with CSV output ([`harness`]) and a thin
//!   `advt` CLI binary on top of it.
//!
//! See the `examples/` directory for one runnable program per capability.

// pub mod domains;
pub mod geometry;
// pub mod harness;
pub mod pomdp;
pub mod rng;
pub mod solver;
pub mod vtree;

pub use pomdp::{
    discounted_return, Action, Episode, Observation, ObservationKind, PomdpModel, State,
    Transition, WeightedBelief,
};
pub use solver::{BackupMode, Budget, Planner, SolverConfig};
pub use vtree::{PartitionMode, VoronoiTree};
