//! Benchmark POMDP domains.
//!
//! Six scenarios exercising the planner across discrete and continuous
//! observation spaces and action-space dimensions from 2 to 12:
//!
//! - [`pushbox`]: a disk robot nudges a puck into a goal region (2D/3D,
//!   discrete bearing/contact observations, noisy pushes).
//! - [`parking`]: a second-order vehicle localizes itself from terrain
//!   sensors and threads a narrow corridor (2D/3D, discrete observations).
//! - [`sensor_placement`]: a D-joint manipulator mounts a sensor through a
//!   slot between four walls, localizing by touch (6-12 DOF, discrete).
//! - [`vdp_tag`]: tag a target following a Van der Pol vector field; the
//!   agent chooses a heading and whether to fire a costly range sensor
//!   (continuous 8-beam observations, disconnected action space).
//! - [`lunar_lander`]: land a thrust-vectoring module from a fast descent
//!   (continuous actions and observations).
//! - [`toy`]: small analytic problems used by tests and examples.
//!
//! Every domain separates its randomness into an explicit noise vector:
//! `step` draws the vector and delegates to `step_with_noise`, which is a
//! pure function and the surface that golden transition fixtures pin down.
//! The per-domain geometry lives in a config struct with documented keys
//! that the experiment harness can override from a config file.

pub mod lunar_lander;
pub mod parking;
pub mod pushbox;
pub mod sensor_placement;
pub mod toy;
pub mod vdp_tag;

use crate::geometry::gaussian;
use crate::pomdp::{PomdpModel, State, Transition};
use crate::solver::SolverConfig;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Deterministic stepping under an explicit noise vector; the layout and
/// neutral values of the vector are documented per domain. `step` is
/// `draw_noise` + `step_with_noise`.
pub trait NoisyStep {
    fn noise_dim(&self) -> usize;
    fn draw_noise(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Noise values that disable every stochastic channel (means of
    /// multiplicative channels, zeros elsewhere).
    fn neutral_noise(&self) -> Vec<f64>;
    fn step_with_noise(&self, state: &State, action: &[f64], noise: &[f64]) -> Transition;
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("unknown domain '{0}'")]
    UnknownDomain(String),
    #[error("unknown config key '{0}' for domain '{1}'")]
    UnknownKey(String, &'static str),
}

/// Truncated normal sample via rejection (truncation bounds sit within a
/// standard deviation or two everywhere in these domains).
pub fn sample_trunc_normal(mu: f64, sigma: f64, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    if sigma <= 0.0 {
        return mu.clamp(lo, hi);
    }
    loop {
        let x = mu + sigma * gaussian(rng);
        if x >= lo && x <= hi {
            return x;
        }
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `P(X in [a, b])` for `X ~ N(mu, sigma^2)` truncated to `[lo, hi]`.
pub fn trunc_normal_prob(mu: f64, sigma: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    let aa = a.max(lo);
    let bb = b.min(hi);
    if bb <= aa {
        return 0.0;
    }
    if sigma <= 0.0 {
        return if mu >= aa && mu <= bb { 1.0 } else { 0.0 };
    }
    let z = |v: f64| normal_cdf((v - mu) / sigma);
    let denom = z(hi) - z(lo);
    if denom <= 0.0 {
        return 0.0;
    }
    (z(bb) - z(aa)) / denom
}

/// Wraps an angle to `[0, 2pi)`.
pub fn wrap_tau(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut t = theta % tau;
    if t < 0.0 {
        t += tau;
    }
    t
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_pi(theta: f64) -> f64 {
    let t = wrap_tau(theta);
    if t > std::f64::consts::PI {
        t - std::f64::consts::TAU
    } else {
        t
    }
}

pub(crate) fn point_in_box(p: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    p.iter().zip(lo.iter().zip(hi)).all(|(x, (l, u))| *x >= *l && *x <= *u)
}

/// Squared distance from point `p` to the segment `a..b`.
pub(crate) fn seg_point_dist2(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for i in 0..a.len() {
        let d = b[i] - a[i];
        ab2 += d * d;
        ap_ab += (p[i] - a[i]) * d;
    }
    let t = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    (0..a.len())
        .map(|i| {
            let c = a[i] + t * (b[i] - a[i]);
            (p[i] - c) * (p[i] - c)
        })
        .sum()
}

/// Segment vs axis-aligned box intersection (slab method).
pub(crate) fn seg_box_intersects(p0: &[f64], p1: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    let mut t_min = 0.0_f64;
    let mut t_max = 1.0_f64;
    for i in 0..p0.len() {
        let d = p1[i] - p0[i];
        if d.abs() < 1e-15 {
            if p0[i] < lo[i] || p0[i] > hi[i] {
                return false;
            }
        } else {
            let mut t0 = (lo[i] - p0[i]) / d;
            let mut t1 = (hi[i] - p0[i]) / d;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_min = t_min.max(t0);
            t_max = t_max.min(t1);
            if t_min > t_max {
                return false;
            }
        }
    }
    true
}

/// Discounted return of a single random-policy rollout, capped at `depth`
/// steps. Domains can use this as their rollout heuristic.
pub fn random_rollout<M: PomdpModel + ?Sized>(
    model: &M,
    state: &State,
    depth: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut s = state.clone();
    let mut total = 0.0;
    let mut scale = 1.0;
    for _ in 0..depth {
        if model.is_terminal(&s) {
            break;
        }
        let a = model.action_space().sample_uniform(rng);
        let t = model.step(&s, &a, rng);
        total += scale * t.reward;
        scale *= model.discount();
        s = t.next_state;
    }
    total
}

/// A benchmark domain identifier, as spelled in config files and on the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainId {
    Pushbox2d,
    Pushbox3d,
    Parking2d,
    Parking3d,
    SensorPlacement(usize),
    VdpTag,
    LunarLander,
}

impl DomainId {
    pub fn parse(name: &str) -> Result<Self, DomainError> {
        match name.to_ascii_lowercase().as_str() {
            "pushbox2d" => Ok(Self::Pushbox2d),
            "pushbox3d" => Ok(Self::Pushbox3d),
            "parking2d" => Ok(Self::Parking2d),
            "parking3d" => Ok(Self::Parking3d),
            "sensorplacement-6" => Ok(Self::SensorPlacement(6)),
            "sensorplacement-8" => Ok(Self::SensorPlacement(8)),
            "sensorplacement-10" => Ok(Self::SensorPlacement(10)),
            "sensorplacement-12" => Ok(Self::SensorPlacement(12)),
            "vdptag" | "vdp-tag" => Ok(Self::VdpTag),
            "lunarlander" | "lunar-lander" => Ok(Self::LunarLander),
            other => Err(DomainError::UnknownDomain(other.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Pushbox2d => "pushbox2d".into(),
            Self::Pushbox3d => "pushbox3d".into(),
            Self::Parking2d => "parking2d".into(),
            Self::Parking3d => "parking3d".into(),
            Self::SensorPlacement(d) => format!("sensorplacement-{d}"),
            Self::VdpTag => "vdptag".into(),
            Self::LunarLander => "lunarlander".into(),
        }
    }
}

/// Builds a domain model, applying `key = value` overrides from a domain
/// config file (keys documented on each domain's config struct).
pub fn build_model(
    id: DomainId,
    overrides: &[(String, f64)],
) -> Result<Box<dyn PomdpModel + Send + Sync>, DomainError> {
    Ok(match id {
        DomainId::Pushbox2d => {
            let mut cfg = pushbox::PushboxConfig::new(2);
            apply_overrides(&mut cfg, overrides, "pushbox2d")?;
            Box::new(pushbox::Pushbox::new(cfg))
        }
        DomainId::Pushbox3d => {
            let mut cfg = pushbox::PushboxConfig::new(3);
            apply_overrides(&mut cfg, overrides, "pushbox3d")?;
            Box::new(pushbox::Pushbox::new(cfg))
        }
        DomainId::Parking2d => {
            let mut cfg = parking::ParkingConfig::new(false);
            apply_overrides(&mut cfg, overrides, "parking2d")?;
            Box::new(parking::Parking::new(cfg))
        }
        DomainId::Parking3d => {
            let mut cfg = parking::ParkingConfig::new(true);
            apply_overrides(&mut cfg, overrides, "parking3d")?;
            Box::new(parking::Parking::new(cfg))
        }
        DomainId::SensorPlacement(d) => {
            let mut cfg = sensor_placement::SensorPlacementConfig::new(d);
            apply_overrides(&mut cfg, overrides, "sensorplacement")?;
            Box::new(sensor_placement::SensorPlacement::new(cfg))
        }
        DomainId::VdpTag => {
            let mut cfg = vdp_tag::VdpTagConfig::default();
            apply_overrides(&mut cfg, overrides, "vdptag")?;
            Box::new(vdp_tag::VdpTag::new(cfg))
        }
        DomainId::LunarLander => {
            let mut cfg = lunar_lander::LanderConfig::default();
            apply_overrides(&mut cfg, overrides, "lunarlander")?;
            Box::new(lunar_lander::LunarLander::new(cfg))
        }
    })
}

/// Config structs expose their documented keys through this trait so domain
/// config files stay a flat `key = value` format.
pub trait ConfigKeys {
    fn set(&mut self, key: &str, value: f64) -> bool;
}

fn apply_overrides<C: ConfigKeys>(
    cfg: &mut C,
    overrides: &[(String, f64)],
    domain: &'static str,
) -> Result<(), DomainError> {
    for (k, v) in overrides {
        if !cfg.set(k, *v) {
            return Err(DomainError::UnknownKey(k.clone(), domain));
        }
    }
    Ok(())
}

/// Per-domain solver defaults: exploration constant, Lipschitz constant and
/// refinement constant picked by a coarse grid search at desk scale, plus
/// widening constants for the continuous-observation domains. The seed and
/// budget are left at their global defaults.
pub fn default_solver_config(id: DomainId) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    match id {
        DomainId::Pushbox2d | DomainId::Pushbox3d => {
            cfg.ucb_c = 150.0;
            cfg.lipschitz = 350.0;
            cfg.refine_c = 1.0;
        }
        DomainId::Parking2d | DomainId::Parking3d => {
            cfg.ucb_c = 15.0;
            cfg.lipschitz = 12.0;
            cfg.refine_c = 1.0;
        }
        DomainId::SensorPlacement(_) => {
            cfg.ucb_c = 150.0;
            cfg.lipschitz = 500.0;
            cfg.refine_c = 1.0;
        }
        DomainId::VdpTag => {
            cfg.ucb_c = 15.0;
            cfg.lipschitz = 12.0;
            cfg.refine_c = 1.0;
            cfg.widen_k = 5.0;
            cfg.widen_alpha = 0.1;
        }
        DomainId::LunarLander => {
            cfg.ucb_c = 50.0;
            cfg.lipschitz = 250.0;
            cfg.refine_c = 1.0;
            cfg.widen_k = 5.0;
            cfg.widen_alpha = 0.1;
        }
    }
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn trunc_normal_stays_in_bounds() {
        let mut rng = stream_rng(40, 0);
        for _ in 0..10_000 {
            let x = sample_trunc_normal(1.0, 0.1, 0.9, 1.1, &mut rng);
            assert!((0.9..=1.1).contains(&x));
        }
    }

    #[test]
    fn trunc_normal_prob_normalizes() {
        let mu = 0.0;
        let s = std::f64::consts::PI / 18.0;
        let total = trunc_normal_prob(mu, s, -s, s, -1.0, 1.0);
        assert!((total - 1.0).abs() < 1e-12);
        let half = trunc_normal_prob(mu, s, -s, s, -1.0, 0.0);
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wrap_angles() {
        assert!((wrap_tau(-0.1) - (std::f64::consts::TAU - 0.1)).abs() < 1e-12);
        assert!((wrap_pi(3.5 * std::f64::consts::PI) - (-0.5 * std::f64::consts::PI)).abs() < 1e-9);
    }

    #[test]
    fn segment_box_hits_and_misses() {
        let lo = [1.0, 1.0];
        let hi = [2.0, 2.0];
        assert!(seg_box_intersects(&[0.0, 0.0], &[3.0, 3.0], &lo, &hi));
        assert!(!seg_box_intersects(&[0.0, 0.0], &[0.5, 3.0], &lo, &hi));
        // Fully inside.
        assert!(seg_box_intersects(&[1.2, 1.2], &[1.8, 1.3], &lo, &hi));
        // Parallel slab, outside.
        assert!(!seg_box_intersects(&[0.0, 1.5], &[0.9, 1.5], &lo, &hi));
    }

    #[test]
    fn segment_point_distance() {
        let d2 = seg_point_dist2(&[0.0, 0.0], &[2.0, 0.0], &[1.0, 1.5]);
        assert!((d2 - 2.25).abs() < 1e-12);
        // Beyond the endpoint: distance to the endpoint.
        let d2 = seg_point_dist2(&[0.0, 0.0], &[2.0, 0.0], &[3.0, 0.0]);
        assert!((d2 - 1.0).abs() < 1e-12);
    }
}
