//! Constrained non-convex least squares for the quartic reward model.
//!
//! Rewards obey `X = <A, theta>^2 + noise`, so the natural fit minimizes the
//! quartic loss `L(theta) = 1/2 * sum_t (X_t - <A_t, theta>^2)^2` over a ball
//! intersected with an optional half-space that pins the sign of `theta`
//! (the loss itself satisfies `L(theta) = L(-theta)` exactly). The solver is
//! projected gradient descent with backtracking from several starts, the
//! first of them spectral. A brute-force grid oracle validates it in low
//! dimension.

use rand::Rng;
use thiserror::Error;

use crate::core::{Action, BanditSession, CoreError, Environment, Phase, RngState, Trajectory};
use crate::linalg;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("estimator problem needs at least one datum")]
    EmptyProblem,
    #[error("datum {index} has dimension {found}, expected {expected}")]
    InconsistentDimensions {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("ball radius {0} must lie in (0, 1]")]
    InvalidBallRadius(f64),
    #[error("half-space direction must be nonzero")]
    ZeroDirection,
    #[error("half-space offset {offset} exceeds ball radius {radius}; the feasible set is empty")]
    EmptyFeasibleSet { offset: f64, radius: f64 },
    #[error("solver config invalid: {0}")]
    InvalidConfig(&'static str),
    #[error("brute-force oracle supports dimension <= 3, got {0}")]
    UnsupportedDimension(usize),
    #[error("grid needs at least 11 points per axis, got {0}")]
    GridTooCoarse(usize),
    #[error("no grid point falls in the feasible set")]
    EmptyFeasibleGrid,
    #[error("budget must be at least 1")]
    InvalidBudget,
    #[error("confidence level {0} must lie in (0, 1]")]
    InvalidConfidence(f64),
    #[error(transparent)]
    Core(#[from] CoreError),
}

// ---------------------------------------------------------------------------
// Feasible sets
// ---------------------------------------------------------------------------

/// Half-space `{theta : <direction, theta> >= offset}` with a unit direction.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    direction: Vec<f64>,
    offset: f64,
}

impl HalfSpace {
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Ball of a given radius, optionally cut by one half-space.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    ball_radius: f64,
    half_space: Option<HalfSpace>,
}

impl FeasibleSet {
    pub fn ball(radius: f64) -> Result<Self, EstimatorError> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(EstimatorError::InvalidBallRadius(radius));
        }
        Ok(Self {
            ball_radius: radius,
            half_space: None,
        })
    }

    /// Ball cut by `<direction, theta> >= offset`. The direction is
    /// normalized here; the offset is interpreted against the unit direction
    /// and must not exceed the ball radius (that would empty the set).
    pub fn with_half_space(
        radius: f64,
        direction: &[f64],
        offset: f64,
    ) -> Result<Self, EstimatorError> {
        let mut set = Self::ball(radius)?;
        let unit = linalg::normalized(direction).ok_or(EstimatorError::ZeroDirection)?;
        if offset > radius {
            return Err(EstimatorError::EmptyFeasibleSet { offset, radius });
        }
        set.half_space = Some(HalfSpace {
            direction: unit,
            offset,
        });
        Ok(set)
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn half_space(&self) -> Option<&HalfSpace> {
        self.half_space.as_ref()
    }

    pub fn contains(&self, theta: &[f64], tol: f64) -> bool {
        if linalg::norm(theta) > self.ball_radius + tol {
            return false;
        }
        match &self.half_space {
            Some(hs) => linalg::dot(&hs.direction, theta) >= hs.offset - tol,
            None => true,
        }
    }

    /// Exact Euclidean projection onto the set.
    ///
    /// With only the ball active this is radial scaling. With the half-space
    /// present the problem reduces to two dimensions: writing the point as
    /// `a * u + w * e` with `u` the half-space direction and `e` the unit
    /// residual, the projection of `(a, w)` onto
    /// `{(t, s) : t >= b, s >= 0, t^2 + s^2 <= R^2}` is the half-plane clamp
    /// when that stays in the disk, the disk scaling when that satisfies the
    /// half-plane, and the corner `(b, sqrt(R^2 - b^2))` otherwise.
    pub fn project(&self, theta: &[f64]) -> Vec<f64> {
        let Some(hs) = &self.half_space else {
            return project_ball(theta, self.ball_radius);
        };
        if self.contains(theta, 0.0) {
            return theta.to_vec();
        }
        let radius = self.ball_radius;
        let offset = hs.offset;
        let along = linalg::dot(&hs.direction, theta);
        let residual = linalg::add_scaled(theta, -along, &hs.direction);
        let width = linalg::norm(&residual);

        let clamped = along.max(offset);
        let (t, s) = if clamped * clamped + width * width <= radius * radius {
            (clamped, width)
        } else {
            let norm = (along * along + width * width).sqrt();
            let scale = radius / norm;
            if along * scale >= offset {
                (along * scale, width * scale)
            } else {
                // Both single constraints reject their own projections; the
                // minimizer sits on the corner circle. width = 0 never
                // reaches this branch (one of the clamps is feasible there).
                (offset, (radius * radius - offset * offset).max(0.0).sqrt())
            }
        };
        let mut out = linalg::scaled(&hs.direction, t);
        if width > 0.0 {
            out = linalg::add_scaled(&out, s / width, &residual);
        }
        out
    }
}

fn project_ball(theta: &[f64], radius: f64) -> Vec<f64> {
    let n = linalg::norm(theta);
    if n <= radius {
        theta.to_vec()
    } else {
        linalg::scaled(theta, radius / n)
    }
}

/// Free-function form of [`FeasibleSet::project`].
pub fn project_feasible(theta: &[f64], feasible: &FeasibleSet) -> Vec<f64> {
    feasible.project(theta)
}

// ---------------------------------------------------------------------------
// Problems and the quartic loss
// ---------------------------------------------------------------------------

/// One group of identical actions with reward sufficient statistics. Policy
/// designs replay a handful of distinct actions many times, so grouping makes
/// loss and gradient evaluation O(distinct actions) instead of O(rounds)
/// while producing the exact same values.
#[derive(Debug, Clone)]
struct ActionGroup {
    coords: Vec<f64>,
    count: f64,
    reward_sum: f64,
    reward_sq_sum: f64,
}

/// Dataset of (action, reward) pairs plus the feasible set for the fit.
#[derive(Debug, Clone)]
pub struct EstimatorProblem {
    data: Vec<(Action, f64)>,
    groups: Vec<ActionGroup>,
    feasible: FeasibleSet,
    dim: usize,
}

impl EstimatorProblem {
    pub fn new(data: Vec<(Action, f64)>, feasible: FeasibleSet) -> Result<Self, EstimatorError> {
        let first = data.first().ok_or(EstimatorError::EmptyProblem)?;
        let dim = first.0.dim();
        for (index, (a, _)) in data.iter().enumerate() {
            if a.dim() != dim {
                return Err(EstimatorError::InconsistentDimensions {
                    index,
                    found: a.dim(),
                    expected: dim,
                });
            }
        }
        let mut groups: Vec<ActionGroup> = Vec::new();
        let mut index: std::collections::HashMap<Vec<u64>, usize> =
            std::collections::HashMap::new();
        for (a, x) in &data {
            let key: Vec<u64> = a.coords().iter().map(|c| c.to_bits()).collect();
            match index.get(&key) {
                Some(&g) => {
                    groups[g].count += 1.0;
                    groups[g].reward_sum += x;
                    groups[g].reward_sq_sum += x * x;
                }
                None => {
                    index.insert(key, groups.len());
                    groups.push(ActionGroup {
                        coords: a.coords().to_vec(),
                        count: 1.0,
                        reward_sum: *x,
                        reward_sq_sum: x * x,
                    });
                }
            }
        }
        Ok(Self {
            data,
            groups,
            feasible,
            dim,
        })
    }

    pub fn data(&self) -> &[(Action, f64)] {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feasible(&self) -> &FeasibleSet {
        &self.feasible
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn mean_reward(&self) -> f64 {
        self.groups.iter().map(|g| g.reward_sum).sum::<f64>() / self.data.len() as f64
    }
}

/// `1/2 * sum_t (X_t - <A_t, theta>^2)^2`.
pub fn quartic_loss(theta: &[f64], problem: &EstimatorProblem) -> f64 {
    debug_assert_eq!(theta.len(), problem.dim());
    let mut loss = 0.0;
    for g in &problem.groups {
        let q = linalg::dot(&g.coords, theta).powi(2);
        loss += g.reward_sq_sum - 2.0 * g.reward_sum * q + g.count * q * q;
    }
    0.5 * loss
}

/// Analytic gradient `-2 * sum_t (X_t - <A_t, theta>^2) <A_t, theta> A_t`.
pub fn quartic_loss_gradient(theta: &[f64], problem: &EstimatorProblem) -> Vec<f64> {
    debug_assert_eq!(theta.len(), problem.dim());
    let mut grad = vec![0.0; theta.len()];
    for g in &problem.groups {
        let s = linalg::dot(&g.coords, theta);
        let coeff = -2.0 * s * (g.reward_sum - g.count * s * s);
        for (gi, ci) in grad.iter_mut().zip(&g.coords) {
            *gi += coeff * ci;
        }
    }
    grad
}

// ---------------------------------------------------------------------------
// Spectral initialization
// ---------------------------------------------------------------------------

/// Spectral start for the quartic fit: the leading eigenvector of
/// `M = (1/n) sum_t X_t A_t A_t^T` (power iteration, 200 steps or relative
/// change below 1e-10, sign-insensitive), scaled to
/// `clip(sqrt(max(0, d * mean(X))), 0, ball_radius)`.
///
/// Returns the zero vector when `M` vanishes or the scale clips to zero;
/// callers fall back to random starts.
pub fn spectral_init(problem: &EstimatorProblem) -> Vec<f64> {
    let d = problem.dim();
    let n = problem.len() as f64;
    let mut m = vec![vec![0.0; d]; d];
    for g in &problem.groups {
        let w = g.reward_sum / n;
        for (row, ci) in m.iter_mut().zip(&g.coords) {
            for (cell, cj) in row.iter_mut().zip(&g.coords) {
                *cell += w * ci * cj;
            }
        }
    }
    if m.iter().all(|row| row.iter().all(|&v| v == 0.0)) {
        return vec![0.0; d];
    }
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 / (i + 1) as f64).collect();
    v = linalg::normalized(&v).expect("nonzero start");
    for _ in 0..200 {
        let w: Vec<f64> = m.iter().map(|row| linalg::dot(row, &v)).collect();
        let Some(wn) = linalg::normalized(&w) else {
            return vec![0.0; d];
        };
        let change = linalg::dist_sq(&wn, &v)
            .sqrt()
            .min(linalg::dist_sq(&linalg::scaled(&wn, -1.0), &v).sqrt());
        v = wn;
        if change < 1e-10 {
            break;
        }
    }
    let scale = (problem.dim() as f64 * problem.mean_reward())
        .max(0.0)
        .sqrt()
        .clamp(0.0, problem.feasible.ball_radius());
    linalg::scaled(&v, scale)
}

// ---------------------------------------------------------------------------
// Projected gradient descent
// ---------------------------------------------------------------------------

/// How the first descent start is chosen; remaining restarts are random
/// feasible points.
#[derive(Debug, Clone)]
pub enum InitMode {
    Spectral,
    Warm(Vec<f64>),
    Random,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_size: f64,
    pub grad_tolerance: f64,
    pub restarts: usize,
    pub init_mode: InitMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step_size: 0.1,
            grad_tolerance: 1e-8,
            restarts: 5,
            init_mode: InitMode::Spectral,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), EstimatorError> {
        if self.max_iters == 0 {
            return Err(EstimatorError::InvalidConfig("max_iters must be >= 1"));
        }
        if self.step_size.is_nan() || self.step_size <= 0.0 {
            return Err(EstimatorError::InvalidConfig("step_size must be > 0"));
        }
        if self.restarts == 0 {
            return Err(EstimatorError::InvalidConfig("restarts must be >= 1"));
        }
        Ok(())
    }
}

/// One backtracking projected-gradient step. Returns the accepted iterate and
/// its loss, or `None` when the gradient mapping already meets the tolerance
/// or no step length decreases the loss (40 halvings of the base step).
fn descent_step(
    problem: &EstimatorProblem,
    theta: &[f64],
    loss: f64,
    config: &SolverConfig,
) -> Option<(Vec<f64>, f64)> {
    let grad = quartic_loss_gradient(theta, problem);
    let base = problem
        .feasible
        .project(&linalg::add_scaled(theta, -config.step_size, &grad));
    let mapping = linalg::dist_sq(theta, &base).sqrt() / config.step_size;
    if mapping < config.grad_tolerance {
        return None;
    }
    let mut step = config.step_size;
    for halving in 0..=40 {
        let cand = if halving == 0 {
            base.clone()
        } else {
            problem
                .feasible
                .project(&linalg::add_scaled(theta, -step, &grad))
        };
        let cand_loss = quartic_loss(&cand, problem);
        if cand_loss <= loss {
            return Some((cand, cand_loss));
        }
        step *= 0.5;
    }
    None
}

fn run_descent(
    problem: &EstimatorProblem,
    start: &[f64],
    config: &SolverConfig,
) -> (Vec<f64>, f64) {
    let mut theta = problem.feasible.project(start);
    let mut loss = quartic_loss(&theta, problem);
    for _ in 0..config.max_iters {
        match descent_step(problem, &theta, loss, config) {
            Some((next, next_loss)) => {
                theta = next;
                loss = next_loss;
            }
            None => break,
        }
    }
    (theta, loss)
}

/// A point drawn uniformly from the ball and projected onto the feasible set.
fn random_feasible_point(
    dim: usize,
    feasible: &FeasibleSet,
    rng: &mut RngState,
) -> Result<Vec<f64>, EstimatorError> {
    let dir = crate::core::sample_unit_sphere(dim, rng)?;
    let radius = feasible.ball_radius() * rng.random::<f64>().powf(1.0 / dim as f64);
    Ok(feasible.project(&linalg::scaled(dir.coords(), radius)))
}

/// Best feasible point found by projected gradient descent on the quartic
/// loss from `restarts` starts (the configured init first, then random
/// feasible points). The output is feasible to 1e-9 and its loss never
/// exceeds the loss of any start used.
pub fn constrained_least_squares(
    problem: &EstimatorProblem,
    config: &SolverConfig,
    rng: &mut RngState,
) -> Result<Vec<f64>, EstimatorError> {
    config.validate()?;
    let d = problem.dim();
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(config.restarts);
    match &config.init_mode {
        InitMode::Spectral => {
            let s = spectral_init(problem);
            if linalg::norm(&s) > 0.0 {
                starts.push(s);
            }
        }
        InitMode::Warm(v) => starts.push(v.clone()),
        InitMode::Random => {}
    }
    while starts.len() < config.restarts {
        starts.push(random_feasible_point(d, &problem.feasible, rng)?);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let (theta, loss) = run_descent(problem, start, config);
        if best.as_ref().is_none_or(|(_, b)| loss < *b) {
            best = Some((theta, loss));
        }
    }
    Ok(best.expect("at least one start").0)
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Exhaustive grid minimizer of the quartic loss over the feasible set, for
/// validating the descent solver in dimension <= 3. The grid spans
/// `[-R, R]` per axis with `grid_points_per_axis` points; infeasible points
/// are skipped and ties break toward the lowest flat index.
pub fn brute_force_ls_oracle(
    problem: &EstimatorProblem,
    grid_points_per_axis: usize,
) -> Result<Vec<f64>, EstimatorError> {
    let d = problem.dim();
    if d > 3 {
        return Err(EstimatorError::UnsupportedDimension(d));
    }
    if grid_points_per_axis < 11 {
        return Err(EstimatorError::GridTooCoarse(grid_points_per_axis));
    }
    let k = grid_points_per_axis;
    let radius = problem.feasible.ball_radius();
    let coord = |i: usize| -> f64 { -radius + 2.0 * radius * i as f64 / (k - 1) as f64 };

    use rayon::prelude::*;
    let per_row = k.pow(d as u32 - 1);
    let best = (0..k)
        .into_par_iter()
        .map(|i0| {
            let mut local: Option<(f64, usize)> = None;
            let mut theta = vec![0.0; d];
            theta[0] = coord(i0);
            for rest in 0..per_row {
                let mut idx = rest;
                for slot in theta.iter_mut().skip(1) {
                    *slot = coord(idx % k);
                    idx /= k;
                }
                if !problem.feasible.contains(&theta, 1e-12) {
                    continue;
                }
                let loss = quartic_loss(&theta, problem);
                let flat = i0 * per_row + rest;
                if local.is_none_or(|(bl, bf)| (loss, flat) < (bl, bf)) {
                    local = Some((loss, flat));
                }
            }
            local
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(x), Some(y)) => Some(if x < y { x } else { y }),
            },
        );
    // flat = i0 * per_row + rest, with rest encoding axes 1.. in base k.
    let (_, flat) = best.ok_or(EstimatorError::EmptyFeasibleGrid)?;
    let mut theta = vec![0.0; d];
    theta[0] = coord(flat / per_row);
    let mut idx = flat % per_row;
    for slot in theta.iter_mut().skip(1) {
        *slot = coord(idx % k);
        idx /= k;
    }
    Ok(theta)
}

// ---------------------------------------------------------------------------
// Radius estimation
// ---------------------------------------------------------------------------

/// Result of a uniform-play probe of the squared radius.
#[derive(Debug, Clone)]
pub struct RadiusProbe {
    /// `clip(d * mean reward, 0, 1)`, an estimate of `||theta_star||^2`.
    pub estimate: f64,
    /// Gaussian-style confidence half-width at the requested level, computed
    /// from the empirical reward variance.
    pub halfwidth: f64,
    /// The played rounds, so the probe's regret is accounted.
    pub trajectory: Trajectory,
}

/// Plays `budget` uniform unit-sphere actions and estimates the squared
/// radius from the mean reward, which has expectation `||theta_star||^2 / d`.
pub fn estimate_radius_squared(
    env: &Environment,
    budget: usize,
    delta: f64,
    rng: &mut RngState,
) -> Result<RadiusProbe, EstimatorError> {
    if budget == 0 {
        return Err(EstimatorError::InvalidBudget);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(EstimatorError::InvalidConfidence(delta));
    }
    let mut session = BanditSession::new(env, budget);
    session.set_phase(Phase::RadiusProbe);
    let estimate = radius_probe_on(&mut session, budget, rng)?;
    let trajectory = session.finish();
    let n = budget as f64;
    let mean = trajectory.steps.iter().map(|s| s.reward).sum::<f64>() / n;
    let var = trajectory
        .steps
        .iter()
        .map(|s| (s.reward - mean).powi(2))
        .sum::<f64>()
        / n;
    let halfwidth = env.dim() as f64 * (2.0 * var * (2.0 / delta).ln() / n).sqrt();
    Ok(RadiusProbe {
        estimate,
        halfwidth,
        trajectory,
    })
}

/// Session-level probe used by policies that must account the rounds inside
/// an existing budget. Returns `clip(d * mean reward, 0, 1)`.
pub fn radius_probe_on(
    session: &mut BanditSession<'_>,
    budget: usize,
    rng: &mut RngState,
) -> Result<f64, EstimatorError> {
    if budget == 0 || budget > session.remaining() {
        return Err(EstimatorError::InvalidBudget);
    }
    session.set_phase(Phase::RadiusProbe);
    let d = session.dim();
    let mut sum = 0.0;
    for _ in 0..budget {
        let a = crate::core::sample_unit_sphere(d, rng)?;
        sum += session.play(a, rng)?;
    }
    Ok((d as f64 * sum / budget as f64).clamp(0.0, 1.0))
}
