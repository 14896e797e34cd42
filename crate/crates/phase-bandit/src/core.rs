//! Environment, action geometry, sampling primitives and regret accounting.
//!
//! The environment is a hidden vector `theta_star` with `||theta_star|| = r`
//! for a known radius `r` in `[0, 1]`. Playing an action `a` in the closed
//! unit ball returns `<a, theta_star>^2 + sigma * Z` with `Z` standard
//! Gaussian. Per-round regret is `r^2 - <a, theta_star>^2`, which is
//! non-negative for unit-ball actions.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg;

/// Tolerance for closed-unit-ball membership; absorbs the floating-point
/// drift of normalizations like `(u + v) / sqrt(2)`.
pub const BALL_TOL: f64 = 1e-12;

/// Tolerance for orthogonality checks on bases and sampled directions.
pub const ORTHO_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("action has dimension {action} but the environment has dimension {env}")]
    DimensionMismatch { action: usize, env: usize },
    #[error("action norm {norm} lies outside the closed unit ball")]
    OutsideUnitBall { norm: f64 },
    #[error("parameter norm {norm} does not match the declared radius {radius}")]
    RadiusMismatch { norm: f64, radius: f64 },
    #[error("radius {0} must lie in [0, 1]")]
    InvalidRadius(f64),
    #[error("noise sigma {0} must be finite and non-negative")]
    InvalidSigma(f64),
    #[error("basis of {basis} vectors fills dimension {dim}; the orthogonal complement is empty")]
    EmptyComplement { basis: usize, dim: usize },
    #[error(
        "basis is not a set of pairwise-orthogonal nonzero vectors (worst inner product {max_dot})"
    )]
    InvalidBasis { max_dot: f64 },
    #[error("play budget of {horizon} rounds is exhausted")]
    BudgetExhausted { horizon: usize },
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// A deterministic, splittable random stream.
///
/// Two states created from the same `(seed, stream)` pair produce identical
/// draw sequences, so every run of an experiment is replayable. Distinct
/// stream ids on the same seed are independent streams; sweeps give each
/// (cell, seed, phase) its own id so that execution order and worker count
/// never change results.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh stream on the same seed, keyed by `parts`.
    pub fn substream(&self, parts: &[u64]) -> Self {
        Self::new(self.seed, mix_stream_id(self.stream, parts))
    }

    /// One standard Gaussian draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.sample(StandardNormal)
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapse a list of identifiers into a single stream id.
pub fn mix_stream_id(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

// ---------------------------------------------------------------------------
// Actions and the environment
// ---------------------------------------------------------------------------

/// A point in the closed Euclidean unit ball; the only thing a learner may play.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    coords: Vec<f64>,
}

impl Action {
    /// Checks closed-ball membership up to [`BALL_TOL`].
    pub fn new(coords: Vec<f64>) -> Result<Self, CoreError> {
        if coords.is_empty() {
            return Err(CoreError::InvalidDimension);
        }
        let norm = linalg::norm(&coords);
        if norm.is_nan() || norm > 1.0 + BALL_TOL {
            return Err(CoreError::OutsideUnitBall { norm });
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.coords)
    }

    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// The hidden bandit instance: parameter vector, radius and noise level.
#[derive(Debug, Clone)]
pub struct Environment {
    theta_star: Vec<f64>,
    radius: f64,
    noise_sigma: f64,
}

impl Environment {
    /// Builds an environment whose radius is `||theta_star||` (must be <= 1).
    pub fn new(theta_star: Vec<f64>, noise_sigma: f64) -> Result<Self, CoreError> {
        let radius = linalg::norm(&theta_star);
        Self::with_radius(theta_star, radius, noise_sigma)
    }

    /// Builds an environment, checking `||theta_star|| = radius` to 1e-12.
    pub fn with_radius(
        theta_star: Vec<f64>,
        radius: f64,
        noise_sigma: f64,
    ) -> Result<Self, CoreError> {
        if theta_star.is_empty() {
            return Err(CoreError::InvalidDimension);
        }
        if !(0.0..=1.0 + BALL_TOL).contains(&radius) {
            return Err(CoreError::InvalidRadius(radius));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(CoreError::InvalidSigma(noise_sigma));
        }
        let norm = linalg::norm(&theta_star);
        if (norm - radius).abs() > 1e-12 {
            return Err(CoreError::RadiusMismatch { norm, radius });
        }
        Ok(Self {
            theta_star,
            radius: radius.min(1.0),
            noise_sigma,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    /// One reward observation: `<a, theta_star>^2 + sigma * Z`.
    ///
    /// The simulator refuses illegal plays: the action must match the
    /// environment dimension and lie in the closed unit ball.
    pub fn reward(&self, action: &Action, rng: &mut RngState) -> Result<f64, CoreError> {
        if action.dim() != self.dim() {
            return Err(CoreError::DimensionMismatch {
                action: action.dim(),
                env: self.dim(),
            });
        }
        let norm = action.norm();
        if norm.is_nan() || norm > 1.0 + BALL_TOL {
            return Err(CoreError::OutsideUnitBall { norm });
        }
        let mean = linalg::dot(action.coords(), &self.theta_star).powi(2);
        let noise = if self.noise_sigma == 0.0 {
            0.0
        } else {
            self.noise_sigma * rng.standard_normal()
        };
        Ok(mean + noise)
    }

    /// Per-round regret `r^2 - <a, theta_star>^2`, clamped at zero to absorb
    /// ball-tolerance drift.
    pub fn instant_regret(&self, action: &Action) -> f64 {
        debug_assert_eq!(action.dim(), self.dim());
        let aligned = linalg::dot(action.coords(), &self.theta_star).powi(2);
        (self.radius * self.radius - aligned).max(0.0)
    }

    /// Sum of per-round regrets over a logged trajectory.
    pub fn cumulative_regret(&self, trajectory: &Trajectory) -> f64 {
        trajectory
            .steps
            .iter()
            .map(|s| self.instant_regret(&s.action))
            .sum()
    }

    /// Regret of a final prediction; identical contract to [`Self::instant_regret`].
    pub fn simple_regret(&self, prediction: &Action) -> f64 {
        self.instant_regret(prediction)
    }
}

// ---------------------------------------------------------------------------
// Trajectories and sessions
// ---------------------------------------------------------------------------

/// Which stage of a policy produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Warm-start iteration `k` (1 is the initial scan).
    Warm(u32),
    EtcExplore,
    EtcCommit,
    UniformExplore,
    RadiusProbe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Round index, strictly increasing from 1.
    pub round: usize,
    pub action: Action,
    pub reward: f64,
    pub phase: Phase,
}

/// Output of the warm-start procedure, kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmOutput {
    /// The returned unit-norm action.
    pub action: Action,
    /// Rounds the procedure consumed.
    pub rounds: usize,
    /// Ground-truth quality flag `<action, theta_star>^2 >= r^2 / 64`,
    /// evaluated by the caller that owns the environment. Policies never
    /// read it.
    pub success: bool,
    /// The accumulated orthogonal set of signed, scaled directions.
    pub energy_set: Vec<Vec<f64>>,
}

/// Ordered log of one policy run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Final prediction for pure-exploration runs.
    pub prediction: Option<Action>,
    pub warm_output: Option<WarmOutput>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Action of the last commit-phase step, if the run committed.
    pub fn committed_action(&self) -> Option<&Action> {
        self.steps
            .iter()
            .rev()
            .find(|s| s.phase == Phase::EtcCommit)
            .map(|s| &s.action)
    }
}

/// One learner-environment interaction bounded by a fixed horizon.
///
/// Policies see only the dimension, the budget and the `play` callback; the
/// hidden parameter stays behind [`Environment`]. Every play is audited for
/// ball membership and budget, and logged with its phase label.
pub struct BanditSession<'a> {
    env: &'a Environment,
    horizon: usize,
    phase: Phase,
    trajectory: Trajectory,
}

impl<'a> BanditSession<'a> {
    pub fn new(env: &'a Environment, horizon: usize) -> Self {
        Self {
            env,
            horizon,
            phase: Phase::Warm(1),
            trajectory: Trajectory::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.env.dim()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rounds_used(&self) -> usize {
        self.trajectory.steps.len()
    }

    pub fn remaining(&self) -> usize {
        self.horizon - self.rounds_used()
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    /// Plays one round and logs it. Fails when the budget is exhausted or the
    /// action is illegal.
    pub fn play(&mut self, action: Action, rng: &mut RngState) -> Result<f64, CoreError> {
        if self.remaining() == 0 {
            return Err(CoreError::BudgetExhausted {
                horizon: self.horizon,
            });
        }
        let reward = self.env.reward(&action, rng)?;
        self.trajectory.steps.push(Step {
            round: self.rounds_used() + 1,
            action,
            reward,
            phase: self.phase,
        });
        Ok(reward)
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn finish(self) -> Trajectory {
        self.trajectory
    }

    pub fn trajectory_mut(&mut self) -> &mut Trajectory {
        &mut self.trajectory
    }
}

// ---------------------------------------------------------------------------
// Sphere sampling
// ---------------------------------------------------------------------------

/// Uniform draw from the unit sphere: normalized Gaussian vector. The
/// 0-sphere has exactly two points, so dimension 1 returns a clean sign.
pub fn sample_unit_sphere(dim: usize, rng: &mut RngState) -> Result<Action, CoreError> {
    if dim == 0 {
        return Err(CoreError::InvalidDimension);
    }
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        if dim == 1 {
            if g[0] != 0.0 {
                return Action::new(vec![g[0].signum()]);
            }
            continue;
        }
        if let Some(u) = linalg::normalized(&g) {
            return Action::new(u);
        }
    }
}

/// Uniform draw from the unit sphere of `span(basis)^perp`.
///
/// The basis vectors must be pairwise orthogonal (inner products below
/// [`ORTHO_TOL`]) and nonzero, and must not fill the space. Implemented as a
/// Gaussian draw with the basis components rejected, then normalized; the
/// rejection runs twice for numerical orthogonality.
pub fn sample_sphere_orthogonal(
    dim: usize,
    basis: &[Vec<f64>],
    rng: &mut RngState,
) -> Result<Action, CoreError> {
    if dim == 0 {
        return Err(CoreError::InvalidDimension);
    }
    if basis.len() >= dim {
        return Err(CoreError::EmptyComplement {
            basis: basis.len(),
            dim,
        });
    }
    let mut max_dot: f64 = 0.0;
    for (i, b) in basis.iter().enumerate() {
        if b.len() != dim || linalg::norm(b) == 0.0 {
            return Err(CoreError::InvalidBasis { max_dot: f64::NAN });
        }
        for other in basis.iter().skip(i + 1) {
            max_dot = max_dot.max(linalg::dot(b, other).abs());
        }
    }
    if max_dot >= ORTHO_TOL {
        return Err(CoreError::InvalidBasis { max_dot });
    }
    for _ in 0..64 {
        let mut g: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
        for _ in 0..2 {
            for b in basis {
                let coeff = linalg::dot(&g, b) / linalg::norm_sq(b);
                g = linalg::add_scaled(&g, -coeff, b);
            }
        }
        if linalg::norm(&g) > 1e-8 {
            let u = linalg::normalized(&g).expect("norm checked above");
            return Action::new(u);
        }
    }
    // A Gaussian draw lands in the span of the basis with probability zero.
    Err(CoreError::InvalidBasis { max_dot })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng(stream: u64) -> RngState {
        RngState::new(7, stream)
    }

    fn unit(dim: usize, axis: usize) -> Action {
        let mut c = vec![0.0; dim];
        c[axis] = 1.0;
        Action::new(c).unwrap()
    }

    #[test]
    fn action_rejects_points_outside_the_ball() {
        assert!(Action::new(vec![1.0, 0.1]).is_err());
        assert!(Action::new(vec![]).is_err());
        assert!(Action::new(vec![0.6, 0.8]).is_ok());
    }

    #[test]
    fn environment_checks_radius_and_sigma() {
        assert!(Environment::with_radius(vec![0.6, 0.8], 1.0, 1.0).is_ok());
        assert!(Environment::with_radius(vec![0.6, 0.8], 0.9, 1.0).is_err());
        assert!(Environment::new(vec![1.0, 1.0], 1.0).is_err());
        assert!(Environment::new(vec![0.5], -1.0).is_err());
    }

    #[test]
    fn reward_noiseless_examples() {
        let mut r = rng(0);
        let env = Environment::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(env.reward(&unit(2, 0), &mut r).unwrap(), 1.0);
        assert_eq!(env.reward(&unit(2, 1), &mut r).unwrap(), 0.0);

        let env = Environment::new(vec![0.5, 0.0], 0.0).unwrap();
        let diag = Action::new(vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]).unwrap();
        let x = env.reward(&diag, &mut r).unwrap();
        assert!((x - 0.125).abs() < 1e-15);
    }

    #[test]
    fn reward_rejects_dimension_mismatch() {
        let mut r = rng(0);
        let env = Environment::new(vec![1.0, 0.0], 0.0).unwrap();
        let a = unit(3, 0);
        assert!(matches!(
            env.reward(&a, &mut r),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn instant_regret_examples() {
        let env = Environment::new(vec![0.6, 0.8], 0.0).unwrap();
        let optimal = Action::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(env.instant_regret(&optimal), 0.0);
        let zero = Action::new(vec![0.0, 0.0]).unwrap();
        assert!((env.instant_regret(&zero) - 1.0).abs() < 1e-15);
        assert!((env.instant_regret(&unit(2, 0)) - 0.64).abs() < 1e-15);
    }

    #[test]
    fn cumulative_regret_examples() {
        let env = Environment::new(vec![0.5, 0.0], 0.0).unwrap();
        assert_eq!(env.cumulative_regret(&Trajectory::default()), 0.0);
        let mut rngs = rng(1);
        let mut session = BanditSession::new(&env, 3);
        for _ in 0..3 {
            session
                .play(Action::new(vec![0.0, 0.0]).unwrap(), &mut rngs)
                .unwrap();
        }
        let traj = session.finish();
        assert!((env.cumulative_regret(&traj) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn simple_regret_sign_and_orthogonality() {
        let env = Environment::new(vec![0.6, 0.8], 0.0).unwrap();
        let best = Action::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(env.simple_regret(&best), 0.0);
        assert_eq!(env.simple_regret(&best.negated()), 0.0);
        let orth = Action::new(vec![-0.8, 0.6]).unwrap();
        assert!((env.simple_regret(&orth) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn session_enforces_budget_and_round_indices() {
        let env = Environment::new(vec![1.0, 0.0], 0.0).unwrap();
        let mut r = rng(2);
        let mut session = BanditSession::new(&env, 2);
        session.play(unit(2, 0), &mut r).unwrap();
        session.play(unit(2, 1), &mut r).unwrap();
        assert!(matches!(
            session.play(unit(2, 0), &mut r),
            Err(CoreError::BudgetExhausted { .. })
        ));
        let traj = session.finish();
        let rounds: Vec<usize> = traj.steps.iter().map(|s| s.round).collect();
        assert_eq!(rounds, vec![1, 2]);
    }

    #[test]
    fn unit_sphere_dim_one_is_a_sign() {
        let mut r = rng(3);
        for _ in 0..32 {
            let a = sample_unit_sphere(1, &mut r).unwrap();
            assert!(a.coords()[0] == 1.0 || a.coords()[0] == -1.0);
        }
        assert!(sample_unit_sphere(0, &mut r).is_err());
    }

    #[test]
    fn unit_sphere_norms_and_coordinate_means() {
        let mut r = rng(4);
        for _ in 0..1000 {
            let a = sample_unit_sphere(6, &mut r).unwrap();
            assert!((a.norm() - 1.0).abs() <= 1e-12);
        }
        // Coordinate means of 1e5 draws in dimension 3; each coordinate has
        // variance 1/3, so the mean has standard error 1/sqrt(3e5).
        let trials = 100_000;
        let mut sums = [0.0f64; 3];
        for _ in 0..trials {
            let a = sample_unit_sphere(3, &mut r).unwrap();
            for (s, c) in sums.iter_mut().zip(a.coords()) {
                *s += c;
            }
        }
        let bound = 3.0 / (3.0 * trials as f64).sqrt();
        for s in sums {
            assert!((s / trials as f64).abs() < bound);
        }
    }

    #[test]
    fn orthogonal_sampler_contracts() {
        let mut r = rng(5);
        let e1 = vec![1.0, 0.0];
        for _ in 0..16 {
            let a = sample_sphere_orthogonal(2, std::slice::from_ref(&e1), &mut r).unwrap();
            assert!((a.coords()[1].abs() - 1.0).abs() < 1e-12);
            assert!(a.coords()[0].abs() < 1e-9);
        }

        let basis5 = vec![vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0, 0.0]];
        for _ in 0..64 {
            let a = sample_sphere_orthogonal(5, &basis5, &mut r).unwrap();
            assert!(linalg::dot(a.coords(), &basis5[0]).abs() < 1e-9);
            assert!(linalg::dot(a.coords(), &basis5[1]).abs() < 1e-9);
            assert!((a.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn orthogonal_sampler_errors() {
        let mut r = rng(6);
        let full = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(
            sample_sphere_orthogonal(2, &full, &mut r),
            Err(CoreError::EmptyComplement { .. })
        ));
        let skew = vec![vec![1.0, 0.0, 0.0], vec![0.7, 0.7, 0.0]];
        assert!(matches!(
            sample_sphere_orthogonal(3, &skew, &mut r),
            Err(CoreError::InvalidBasis { .. })
        ));
    }

    #[test]
    fn orthogonal_sampler_second_moment() {
        // dim 4 with one basis vector: the complement is a 3-dimensional
        // sphere, so E <out, e2>^2 = 1/3 with Var = 3/15 - 1/9 = 4/45.
        let mut r = rng(7);
        let basis = vec![vec![1.0, 0.0, 0.0, 0.0]];
        let trials = 100_000;
        let mut sum = 0.0;
        for _ in 0..trials {
            let a = sample_sphere_orthogonal(4, &basis, &mut r).unwrap();
            sum += a.coords()[1] * a.coords()[1];
        }
        let mean = sum / trials as f64;
        let se = (4.0 / 45.0f64 / trials as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn sphere_second_moment_and_reward_variance() {
        // E <A, theta>^2 = r^2 / d and V[X] = 1 + 2(d-1)/(d^3 + 2d^2) at
        // sigma = 1, r = 1, checked with analytic standard errors.
        let d = 4;
        let theta = {
            let mut t = vec![0.0; d];
            t[0] = 1.0;
            t
        };
        let env = Environment::new(theta.clone(), 1.0).unwrap();
        let mut r = rng(8);
        let trials = 200_000;
        let mut sum_sq = 0.0;
        let mut xs = Vec::with_capacity(trials);
        for _ in 0..trials {
            let a = sample_unit_sphere(d, &mut r).unwrap();
            let aligned = linalg::dot(a.coords(), &theta).powi(2);
            sum_sq += aligned;
            xs.push(env.reward(&a, &mut r).unwrap());
        }
        let df = d as f64;
        let m2 = 1.0 / df;
        let m4 = 3.0 / (df * df + 2.0 * df);
        let mean = sum_sq / trials as f64;
        let se = ((m4 - m2 * m2) / trials as f64).sqrt();
        assert!((mean - m2).abs() < 3.0 * se);

        let n = xs.len() as f64;
        let xbar = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - xbar).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = 1.0 + 2.0 * (df - 1.0) / (df * df * df + 2.0 * df * df);
        // Conservative standard error for a sample variance of a roughly
        // Gaussian X: sqrt(2/(n-1)) * var, inflated 2x for the quartic tail.
        let se_var = 2.0 * (2.0 / (n - 1.0)).sqrt() * expected;
        assert!(
            (var - expected).abs() < 3.0 * se_var,
            "var {var} vs {expected}"
        );
    }

    #[test]
    fn rng_streams_are_reproducible_and_distinct() {
        let mut a = RngState::new(42, 9);
        let mut b = RngState::new(42, 9);
        let mut c = RngState::new(42, 10);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
        assert_eq!(mix_stream_id(1, &[2, 3]), mix_stream_id(1, &[2, 3]),);
        assert_ne!(mix_stream_id(1, &[2, 3]), mix_stream_id(1, &[3, 2]));
    }

    proptest! {
        #[test]
        fn simple_regret_is_sign_invariant(coords in proptest::collection::vec(-0.5f64..0.5, 1..6)) {
            let dim = coords.len();
            let mut theta = vec![0.0; dim];
            theta[0] = 0.8;
            let env = Environment::new(theta, 0.0).unwrap();
            let a = Action::new(coords).unwrap();
            prop_assert_eq!(env.simple_regret(&a), env.simple_regret(&a.negated()));
        }

        #[test]
        fn sampled_actions_stay_in_the_ball(dim in 1usize..12, stream in 0u64..32) {
            let mut r = RngState::new(11, stream);
            let a = sample_unit_sphere(dim, &mut r).unwrap();
            prop_assert!(a.norm() <= 1.0 + BALL_TOL);
        }
    }
}
