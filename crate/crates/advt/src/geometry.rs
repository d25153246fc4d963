//! Geometric primitives over the bounded action space.
//!
//! Everything the Voronoi tree needs to manipulate implicitly defined cells:
//! uniform directions on a sphere, bisection onto a cell boundary, Welzl's
//! minimum enclosing ball (for diameter estimation in any dimension), and a
//! hit-and-run sampler for drawing approximately uniform points from a cell.
//! Cells are convex (intersections of half-spaces with the bounding box), so
//! every chord between interior points stays inside; the samplers lean on
//! that.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("sphere diameter must be positive, got {0}")]
    ZeroDiameter(f64),
    #[error("bisection precondition violated: {0}")]
    BisectPrecondition(&'static str),
    #[error("minimum enclosing ball of an empty point set")]
    EmptyPointSet,
}

/// An implicitly defined region of the action space, queried by membership.
pub trait Cell {
    fn contains(&self, point: &[f64]) -> bool;
}

impl<F: Fn(&[f64]) -> bool> Cell for F {
    fn contains(&self, point: &[f64]) -> bool {
        self(point)
    }
}

/// Squared Euclidean distance. Membership tests compare squared distances;
/// the monotone map makes that equivalent to comparing distances.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// A bounded box-shaped action space with Euclidean metric.
///
/// Dimensions listed in `binary_dims` take only their two bound values (used
/// for e.g. an on/off sensor coordinate). Geometrically they are treated as
/// ordinary intervals — cells, diameters and boundary points all live in the
/// relaxed continuum — but whenever an action is *materialized* as a
/// candidate, those coordinates snap to the nearer bound. Snapping never
/// moves a point out of its cell because every existing representative is
/// itself snapped. `forced_first_split_dim` asks the partition to dedicate
/// the first split of the root to the given binary dimension, so that each
/// component of a disconnected space gets its own cell.
#[derive(Clone, Debug)]
pub struct ActionSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
    diameter: f64,
    binary_dims: Vec<usize>,
    forced_first_split_dim: Option<usize>,
}

impl ActionSpace {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(!lower.is_empty());
        for (l, u) in lower.iter().zip(&upper) {
            assert!(l.is_finite() && u.is_finite() && l <= u, "bounds must be finite, lo <= hi");
        }
        let diameter = dist2(&lower, &upper).sqrt();
        Self {
            lower,
            upper,
            diameter,
            binary_dims: Vec::new(),
            forced_first_split_dim: None,
        }
    }

    pub fn with_binary_dim(mut self, dim: usize, force_first_split: bool) -> Self {
        assert!(dim < self.dim());
        self.binary_dims.push(dim);
        if force_first_split {
            self.forced_first_split_dim = Some(dim);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Analytic diameter: the box diagonal.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn forced_first_split_dim(&self) -> Option<usize> {
        self.forced_first_split_dim
    }

    pub fn is_binary_dim(&self, dim: usize) -> bool {
        self.binary_dims.contains(&dim)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *x >= *l && *x <= *u)
    }

    pub fn clamp(&self, p: &mut [f64]) {
        for (x, (l, u)) in p.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.clamp(*l, *u);
        }
    }

    /// Snaps binary coordinates to the nearer bound.
    pub fn snap_binary(&self, p: &mut [f64]) {
        for &d in &self.binary_dims {
            let mid = 0.5 * (self.lower[d] + self.upper[d]);
            p[d] = if p[d] <= mid { self.lower[d] } else { self.upper[d] };
        }
    }

    /// Uniform sample from the box; binary dims take either bound with
    /// probability 1/2.
    pub fn sample_uniform(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| if u > l { rng.gen_range(*l..*u) } else { *l })
            .collect();
        for &d in &self.binary_dims {
            p[d] = if rng.gen::<bool>() { self.upper[d] } else { self.lower[d] };
        }
        p
    }

    /// Uniform sample from the box surface (faces weighted by area).
    /// Degenerate (zero-width) dimensions are skipped as face normals.
    pub fn sample_surface(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut p = self.sample_uniform(rng);
        let widths: Vec<f64> = self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect();
        let volume_like: Vec<f64> = (0..self.dim())
            .map(|d| {
                widths
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != d)
                    .map(|(_, w)| if *w > 0.0 { *w } else { 1.0 })
                    .product()
            })
            .collect();
        let total: f64 = (0..self.dim())
            .filter(|&d| widths[d] > 0.0 || self.dim() == 1)
            .map(|d| volume_like[d])
            .sum();
        if total <= 0.0 {
            return p; // fully degenerate box
        }
        let mut u = rng.gen::<f64>() * total;
        let mut face = 0;
        for d in 0..self.dim() {
            if widths[d] <= 0.0 && self.dim() != 1 {
                continue;
            }
            u -= volume_like[d];
            if u < 0.0 {
                face = d;
                break;
            }
        }
        p[face] = if rng.gen::<bool>() { self.upper[face] } else { self.lower[face] };
        p
    }

    /// Largest `t >= 0` with `origin + t * dir` still inside the box.
    /// `origin` must be inside; degenerate directions yield `f64::INFINITY`
    /// only if the box is unbounded along them, which a box never is, so the
    /// result is finite whenever `dir` is nonzero.
    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> f64 {
        let mut t_max = f64::INFINITY;
        for i in 0..self.dim() {
            if dir[i] > 0.0 {
                t_max = t_max.min((self.upper[i] - origin[i]) / dir[i]);
            } else if dir[i] < 0.0 {
                t_max = t_max.min((self.lower[i] - origin[i]) / dir[i]);
            }
        }
        t_max.max(0.0)
    }
}

/// Uniform direction on the unit sphere (Gaussian normalization; the 1-D
/// sphere degenerates to a random sign).
pub fn sample_unit_direction(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Standard normal via Box-Muller (avoids pulling a distributions crate into
/// the hot path).
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Uniform point on the sphere of the given `diameter` centered at `center`
/// (i.e. at distance `diameter / 2`). The point may lie outside the action
/// space bounds; callers using it as a bisection endpoint only need it on or
/// beyond the cell boundary.
pub fn sample_on_sphere(
    center: &[f64],
    diameter: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, GeometryError> {
    if diameter <= 0.0 {
        return Err(GeometryError::ZeroDiameter(diameter));
    }
    let dir = sample_unit_direction(center.len(), rng);
    Ok(center
        .iter()
        .zip(&dir)
        .map(|(c, d)| c + d * diameter * 0.5)
        .collect())
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

/// Bisection along the segment `inside -> outside` until the bracketing
/// endpoints are less than `eps` apart; returns the endpoint inside the cell,
/// which is then within `eps` of the cell boundary along the segment.
pub fn bisect_boundary(
    cell: &dyn Cell,
    inside: &[f64],
    outside: &[f64],
    eps: f64,
) -> Result<Vec<f64>, GeometryError> {
    if eps <= 0.0 {
        return Err(GeometryError::BisectPrecondition("eps must be positive"));
    }
    if !cell.contains(inside) {
        return Err(GeometryError::BisectPrecondition("inside endpoint not in cell"));
    }
    if cell.contains(outside) {
        return Err(GeometryError::BisectPrecondition("outside endpoint in cell"));
    }
    let mut lo = inside.to_vec();
    let mut hi = outside.to_vec();
    while dist2(&lo, &hi) >= eps * eps {
        let mid = lerp(&lo, &hi, 0.5);
        if cell.contains(&mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Samples a point on the boundary of `cell` as seen from the interior point
/// `from`: a uniform direction is probed at radius `diam_a / 2`; if that
/// probe still lands inside the cell (possible for cells spanning most of
/// the box) the probe is pushed just past the box exit along the same ray,
/// which is guaranteed outside every cell. Bisection then pins the boundary
/// to within `eps`.
pub fn boundary_point(
    cell: &dyn Cell,
    space: &ActionSpace,
    from: &[f64],
    eps: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    debug_assert!(cell.contains(from));
    let dir = sample_unit_direction(space.dim(), rng);
    let radius = space.diameter() * 0.5;
    let probe: Vec<f64> = from.iter().zip(&dir).map(|(c, d)| c + d * radius).collect();
    let outside = if !cell.contains(&probe) {
        probe
    } else {
        let t = space.ray_exit(from, &dir);
        let slack = eps.max(1e-12 * space.diameter().max(1.0));
        from.iter().zip(&dir).map(|(c, d)| c + d * (t + slack)).collect()
    };
    match bisect_boundary(cell, from, &outside, eps) {
        Ok(p) => p,
        // `from` itself sits on the boundary (within eps).
        Err(_) => from.to_vec(),
    }
}

/// A ball returned by [`min_enclosing_ball`].
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, p: &[f64], slack: f64) -> bool {
        distance(&self.center, p) <= self.radius + slack
    }
}

/// Smallest enclosing ball of a point set (Welzl's move-to-front algorithm,
/// exact for the sizes used here: at most a few dozen boundary samples).
pub fn min_enclosing_ball(points: &[Vec<f64>]) -> Result<Ball, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyPointSet);
    }
    let dim = points[0].len();
    // Deterministic shuffle: callers must get identical results for
    // identical inputs regardless of global RNG state.
    let mut order: Vec<&Vec<f64>> = points.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba11);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut support: Vec<&Vec<f64>> = Vec::with_capacity(dim + 1);
    let ball = welzl(&mut order, points.len(), &mut support, dim);
    Ok(ball)
}

fn welzl<'a>(
    points: &mut [&'a Vec<f64>],
    n: usize,
    support: &mut Vec<&'a Vec<f64>>,
    dim: usize,
) -> Ball {
    if n == 0 || support.len() == dim + 1 {
        return ball_of_support(support, dim);
    }
    let ball = welzl(points, n - 1, support, dim);
    let p = points[n - 1];
    let slack = 1e-10 * (1.0 + ball.radius);
    if ball.contains(p, slack) {
        return ball;
    }
    support.push(p);
    let ball = welzl(points, n - 1, support, dim);
    support.pop();
    // Move-to-front keeps the expected runtime linear.
    points[..n].rotate_right(1);
    ball
}

/// Smallest ball having every support point on its boundary: the circumball
/// of the support set within its affine hull. Solved from the linear system
/// `2 (p_i - p_0) . (c - p_0) = |p_i - p_0|^2`.
fn ball_of_support(support: &[&Vec<f64>], dim: usize) -> Ball {
    match support.len() {
        0 => Ball { center: vec![0.0; dim], radius: -1.0 },
        1 => Ball { center: support[0].clone(), radius: 0.0 },
        _ => {
            let p0 = support[0];
            let m = support.len() - 1;
            let u: Vec<Vec<f64>> = support[1..]
                .iter()
                .map(|p| p.iter().zip(p0.iter()).map(|(a, b)| a - b).collect())
                .collect();
            // Gram system: 2 * (u_i . u_j) lambda_j = |u_i|^2.
            let mut a = vec![vec![0.0; m + 1]; m];
            for i in 0..m {
                for j in 0..m {
                    a[i][j] = 2.0 * u[i].iter().zip(&u[j]).map(|(x, y)| x * y).sum::<f64>();
                }
                a[i][m] = u[i].iter().map(|x| x * x).sum::<f64>();
            }
            let lambda = solve_gaussian(&mut a, m);
            let mut center = p0.clone();
            for (i, ui) in u.iter().enumerate() {
                for d in 0..dim {
                    center[d] += lambda[i] * ui[d];
                }
            }
            let radius = support
                .iter()
                .map(|p| distance(&center, p))
                .fold(0.0_f64, f64::max);
            Ball { center, radius }
        }
    }
}

/// Gaussian elimination with partial pivoting on an `m x (m+1)` augmented
/// system. Near-singular pivots (affinely dependent support points) zero the
/// corresponding multiplier, which degrades gracefully to the ball of the
/// independent subset.
fn solve_gaussian(a: &mut [Vec<f64>], m: usize) -> Vec<f64> {
    let mut scale = 0.0_f64;
    for row in a.iter() {
        for &v in &row[..m] {
            scale = scale.max(v.abs());
        }
    }
    let tol = 1e-12 * scale.max(1.0);
    let mut pivot_of = vec![usize::MAX; m];
    let mut used = vec![false; m];
    for col in 0..m {
        let mut best = tol;
        let mut best_row = usize::MAX;
        for (r, row) in a.iter().enumerate() {
            if !used[r] && row[col].abs() > best {
                best = row[col].abs();
                best_row = r;
            }
        }
        if best_row == usize::MAX {
            continue;
        }
        used[best_row] = true;
        pivot_of[col] = best_row;
        let pivot_row = a[best_row].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != best_row && row[col].abs() > 0.0 {
                let f = row[col] / pivot_row[col];
                for c in 0..=m {
                    row[c] -= f * pivot_row[c];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for col in 0..m {
        let r = pivot_of[col];
        if r != usize::MAX && a[r][col].abs() > tol {
            x[col] = a[r][m] / a[r][col];
        }
    }
    x
}

/// Hit-and-run sampler inside a convex cell: starting from `start`, each of
/// the `m` steps picks a uniform direction, locates the two boundary points
/// of the chord through the current point (each via [`bisect_boundary`],
/// with `eps` precision), and jumps to a uniform point on that chord. The
/// chord construction keeps every iterate inside the cell and makes the
/// uniform distribution on the cell stationary. `m = 0` returns `start`
/// unchanged.
pub fn hit_and_run(
    cell: &dyn Cell,
    space: &ActionSpace,
    start: &[f64],
    m: usize,
    eps: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    debug_assert!(cell.contains(start));
    let mut x = start.to_vec();
    let radius = space.diameter() * 0.5;
    for _ in 0..m {
        let dir = sample_unit_direction(space.dim(), rng);
        let fwd = chord_end(cell, space, &x, &dir, radius, eps);
        let neg: Vec<f64> = dir.iter().map(|d| -d).collect();
        let bwd = chord_end(cell, space, &x, &neg, radius, eps);
        let t = rng.gen::<f64>();
        x = lerp(&bwd, &fwd, t);
        debug_assert!(cell.contains(&x));
    }
    x
}

fn chord_end(
    cell: &dyn Cell,
    space: &ActionSpace,
    from: &[f64],
    dir: &[f64],
    radius: f64,
    eps: f64,
) -> Vec<f64> {
    let probe: Vec<f64> = from.iter().zip(dir).map(|(c, d)| c + d * radius).collect();
    let outside = if !cell.contains(&probe) {
        probe
    } else {
        let t = space.ray_exit(from, dir);
        let slack = eps.max(1e-12 * space.diameter().max(1.0));
        from.iter().zip(dir).map(|(c, d)| c + d * (t + slack)).collect()
    };
    match bisect_boundary(cell, from, &outside, eps) {
        Ok(p) => p,
        Err(_) => from.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn sphere_points_sit_at_half_diameter() {
        let mut rng = stream_rng(10, 0);
        let center = vec![0.3, -0.7, 1.1];
        for _ in 0..200 {
            let p = sample_on_sphere(&center, 1.8, &mut rng).unwrap();
            assert!((distance(&p, &center) - 0.9).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_zero_diameter_errors() {
        let mut rng = stream_rng(10, 1);
        assert_eq!(
            sample_on_sphere(&[0.0], 0.0, &mut rng),
            Err(GeometryError::ZeroDiameter(0.0))
        );
    }

    #[test]
    fn one_dim_sphere_is_two_points() {
        let mut rng = stream_rng(11, 0);
        let mut pos = 0usize;
        let n = 10_000;
        for _ in 0..n {
            let p = sample_on_sphere(&[0.0], 2.0, &mut rng).unwrap();
            assert!((p[0].abs() - 1.0).abs() < 1e-12);
            if p[0] > 0.0 {
                pos += 1;
            }
        }
        let freq = pos as f64 / n as f64;
        // 4-sigma band around 0.5 for n = 1e4 is ~+-0.02.
        assert!((0.47..=0.53).contains(&freq), "freq = {freq}");
    }

    /// 1-D Voronoi half-cell {a : |a| <= |a - 0.5|} = (-inf, 0.25];
    /// boundary at the midpoint 0.25.
    #[test]
    fn bisection_finds_voronoi_midpoint() {
        let cell = |p: &[f64]| (p[0] - 0.0).abs() <= (p[0] - 0.5).abs();
        let p = bisect_boundary(&cell, &[0.0], &[1.0], 1e-4).unwrap();
        assert!(cell.contains(&p));
        assert!(p[0] <= 0.25 && p[0] >= 0.25 - 1e-4, "p = {}", p[0]);
    }

    #[test]
    fn bisection_step_count_bound() {
        use std::cell::Cell as StdCell;
        let calls = StdCell::new(0usize);
        let cell = |p: &[f64]| {
            calls.set(calls.get() + 1);
            p[0] <= 0.25
        };
        let inside = [0.2499];
        let outside = [1.0];
        let eps = 1e-4;
        let p = bisect_boundary(&cell, &inside, &outside, eps).unwrap();
        assert!(p[0] <= 0.25);
        let d = (outside[0] - inside[0]).abs();
        let bound = (d / eps).log2().ceil() as usize;
        // Two precondition checks plus one membership test per halving.
        assert!(calls.get() <= bound + 2, "calls = {}, bound = {}", calls.get(), bound);
    }

    #[test]
    fn bisection_rejects_bad_endpoints() {
        let cell = |p: &[f64]| p[0] <= 0.25;
        assert!(bisect_boundary(&cell, &[1.0], &[2.0], 1e-4).is_err());
        assert!(bisect_boundary(&cell, &[0.0], &[0.1], 1e-4).is_err());
        assert!(bisect_boundary(&cell, &[0.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn root_cell_boundary_is_box_boundary() {
        // Whole-space cell: membership is just the box test, so a boundary
        // probe must land within eps of the box surface.
        let space = ActionSpace::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let sp = space.clone();
        let cell = move |p: &[f64]| sp.contains(p);
        let mut rng = stream_rng(12, 0);
        for _ in 0..100 {
            let p = boundary_point(&cell, &space, &[0.2, -0.3], 1e-4, &mut rng);
            assert!(space.contains(&p));
            let to_edge = p
                .iter()
                .map(|x| (1.0 - x.abs()).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(to_edge < 1e-4, "distance to box edge {to_edge}");
        }
    }

    #[test]
    fn meb_single_and_two_points() {
        let b = min_enclosing_ball(&[vec![2.0, 3.0]]).unwrap();
        assert_eq!(b.diameter(), 0.0);

        let b = min_enclosing_ball(&[vec![0.0, 0.0], vec![3.0, 0.0]]).unwrap();
        assert!((b.diameter() - 3.0).abs() < 1e-12);
        assert!((b.center[0] - 1.5).abs() < 1e-12 && b.center[1].abs() < 1e-12);
    }

    #[test]
    fn meb_equilateral_triangle() {
        // Side 1 -> circumradius 1/sqrt(3), diameter 2/sqrt(3).
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3.0_f64.sqrt() / 2.0],
        ];
        let b = min_enclosing_ball(&pts).unwrap();
        assert!((b.diameter() - 2.0 / 3.0_f64.sqrt()).abs() < 1e-9, "diam = {}", b.diameter());
        for p in &pts {
            assert!(b.contains(p, 1e-9));
        }
    }

    #[test]
    fn meb_empty_errors() {
        assert!(min_enclosing_ball(&[]).is_err());
    }

    #[test]
    fn meb_stable_under_interior_points() {
        let mut rng = stream_rng(13, 0);
        let mut pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.2, -0.3],
            vec![-0.5, 0.9, 0.1],
            vec![0.3, -0.8, 0.7],
        ];
        let base = min_enclosing_ball(&pts).unwrap();
        for _ in 0..50 {
            let dir = sample_unit_direction(3, &mut rng);
            let r: f64 = rng.gen::<f64>() * base.radius * 0.99;
            pts.push(
                base.center
                    .iter()
                    .zip(&dir)
                    .map(|(c, d)| c + d * r)
                    .collect(),
            );
        }
        let bigger = min_enclosing_ball(&pts).unwrap();
        assert!((bigger.diameter() - base.diameter()).abs() < 1e-9);
    }

    #[test]
    fn hit_and_run_zero_steps_returns_start() {
        let space = ActionSpace::new_box(vec![-1.0], vec![1.0]);
        let cell = |p: &[f64]| p[0] >= -1.0 && p[0] <= 0.25;
        let mut rng = stream_rng(14, 0);
        let x = hit_and_run(&cell, &space, &[0.0], 0, 1e-4, &mut rng);
        assert_eq!(x, vec![0.0]);
    }

    #[test]
    fn hit_and_run_stays_inside() {
        let space = ActionSpace::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]);
        // Voronoi-style cell: closer to (0,0) than to (0.6, 0.4), inside box.
        let sp = space.clone();
        let cell = move |p: &[f64]| {
            sp.contains(p) && dist2(p, &[0.0, 0.0]) <= dist2(p, &[0.6, 0.4])
        };
        let mut rng = stream_rng(15, 0);
        for trial in 0..200 {
            let x = hit_and_run(&cell, &space, &[-0.5, -0.5], 5 + trial % 7, 1e-4, &mut rng);
            assert!(cell.contains(&x));
        }
    }
}
