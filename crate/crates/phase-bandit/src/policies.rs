//! Learning policies for the quadratic-reward bandit.
//!
//! - [`warm_start_run`]: the adaptive procedure that accumulates an
//!   orthogonal set of signed directions until their combined energy
//!   certifies a constant-factor optimal action.
//! - [`etc_run`]: explore-then-commit around a given anchor action, with a
//!   2d-action perturbation design and a sign-pinned constrained fit.
//! - [`full_policy_run`]: warm start composed with explore-then-commit.
//! - [`uniform_pure_exploration_run`]: the non-adaptive baseline that plays
//!   uniform sphere actions and predicts from a constrained fit.
//!
//! Policy cores only see a [`BanditSession`] (dimension, budget, reward
//! callback) plus their config; the hidden parameter is never read directly.

use thiserror::Error;

use crate::core::{
    sample_sphere_orthogonal, sample_unit_sphere, Action, BanditSession, CoreError, Environment,
    Phase, RngState, Trajectory, WarmOutput,
};
use crate::estimator::{
    constrained_least_squares, EstimatorError, EstimatorProblem, FeasibleSet, SolverConfig,
};
use crate::linalg;
use rand::Rng;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy config invalid: {0}")]
    InvalidConfig(&'static str),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

// ---------------------------------------------------------------------------
// Configs and outcomes
// ---------------------------------------------------------------------------

/// Config for the adaptive warm start.
#[derive(Debug, Clone)]
pub struct WarmStartConfig {
    pub horizon: usize,
    /// Radius the learner assumes for the hidden parameter.
    pub radius: f64,
    /// Multiplies the theoretical episode lengths, which are far too long for
    /// desk-scale horizons at 1.0; experiments use values well below 1.
    pub constant_scale: f64,
}

impl WarmStartConfig {
    pub fn new(horizon: usize, radius: f64) -> Self {
        Self {
            horizon,
            radius,
            constant_scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.constant_scale = scale;
        self
    }

    fn validate(&self) -> Result<(), PolicyError> {
        if self.horizon == 0 {
            return Err(PolicyError::InvalidConfig("horizon must be >= 1"));
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(PolicyError::InvalidConfig("radius must lie in (0, 1]"));
        }
        if self.constant_scale.is_nan() || self.constant_scale <= 0.0 {
            return Err(PolicyError::InvalidConfig("constant_scale must be > 0"));
        }
        Ok(())
    }
}

/// Config for explore-then-commit.
#[derive(Debug, Clone)]
pub struct EtcConfig {
    pub horizon: usize,
    pub radius: f64,
    /// Quality the caller asserts for the anchor action:
    /// `<anchor, theta_star>^2 >= alpha * r^2`. The warm start guarantees
    /// 1/64 on success, so that is the default.
    pub alpha: f64,
    pub constant_scale: f64,
}

impl EtcConfig {
    pub fn new(horizon: usize, radius: f64) -> Self {
        Self {
            horizon,
            radius,
            alpha: 1.0 / 64.0,
            constant_scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.constant_scale = scale;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    fn validate(&self) -> Result<(), PolicyError> {
        if self.horizon == 0 {
            return Err(PolicyError::InvalidConfig("horizon must be >= 1"));
        }
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(PolicyError::InvalidConfig("radius must lie in (0, 1]"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(PolicyError::InvalidConfig("alpha must lie in (0, 1]"));
        }
        if self.constant_scale.is_nan() || self.constant_scale <= 0.0 {
            return Err(PolicyError::InvalidConfig("constant_scale must be > 0"));
        }
        Ok(())
    }
}

/// Warm start plus explore-then-commit, sharing one budget.
#[derive(Debug, Clone)]
pub struct FullPolicyConfig {
    pub warm: WarmStartConfig,
    pub etc: EtcConfig,
}

impl FullPolicyConfig {
    /// Both stages on one scale, with the warm-start quality guarantee 1/64
    /// feeding the commit stage.
    pub fn standard(horizon: usize, radius: f64, scale: f64) -> Self {
        Self::with_scales(horizon, radius, scale, scale)
    }

    /// Separate scales for the two stages.
    pub fn with_scales(horizon: usize, radius: f64, warm_scale: f64, etc_scale: f64) -> Self {
        Self {
            warm: WarmStartConfig::new(horizon, radius).with_scale(warm_scale),
            etc: EtcConfig::new(horizon, radius).with_scale(etc_scale),
        }
    }
}

/// Result of one policy run.
#[derive(Debug, Clone)]
pub struct PolicyOutcome {
    pub trajectory: Trajectory,
    /// Action played for all remaining rounds after the commit step, if any.
    pub committed_action: Option<Action>,
}

impl PolicyOutcome {
    pub fn warm(&self) -> Option<&WarmOutput> {
        self.trajectory.warm_output.as_ref()
    }
}

/// Scaled phase length: `max(1, ceil(scale * raw))`.
fn scaled_len(scale: f64, raw: f64) -> usize {
    let v = (scale * raw).ceil();
    if v.is_finite() && v < 9.0e15 {
        (v as usize).max(1)
    } else {
        usize::MAX / 2
    }
}

// ---------------------------------------------------------------------------
// Warm start
// ---------------------------------------------------------------------------

struct WarmResult {
    action: Action,
    energy_set: Vec<Vec<f64>>,
}

fn energy_sum(energy_set: &[Vec<f64>]) -> f64 {
    energy_set.iter().map(|w| linalg::norm_sq(w)).sum()
}

fn normalized_sum_action(energy_set: &[Vec<f64>]) -> Option<Action> {
    let dim = energy_set.first()?.len();
    let mut sum = vec![0.0; dim];
    for w in energy_set {
        sum = linalg::add_scaled(&sum, 1.0, w);
    }
    let unit = linalg::normalized(&sum)?;
    Action::new(unit).ok()
}

fn warm_start_core(
    session: &mut BanditSession<'_>,
    cfg: &WarmStartConfig,
    rng: &mut RngState,
) -> Result<WarmResult, PolicyError> {
    let d = session.dim();
    let r = cfg.radius;
    let nf = cfg.horizon as f64;
    // Squared-alignment gate r^2/d shared by both stopping rules.
    let accept_threshold = r * r / d as f64;
    let energy_target = r * r / 16.0;

    // Initial scan: replay a fresh uniform direction until its average
    // reward clears the gate.
    session.set_phase(Phase::Warm(1));
    let episode_len = scaled_len(
        cfg.constant_scale,
        8.0 / (accept_threshold * accept_threshold) * (2.0 * nf * nf).ln(),
    );
    let mut energy_set: Vec<Vec<f64>> = Vec::new();
    loop {
        let probe = sample_unit_sphere(d, rng)?;
        let rounds = episode_len.min(session.remaining());
        let mut sum = 0.0;
        for _ in 0..rounds {
            sum += session.play(probe.clone(), rng)?;
        }
        if rounds < episode_len {
            // Budget exhausted mid-episode: the best available output is the
            // last sampled direction.
            return Ok(WarmResult {
                action: probe,
                energy_set,
            });
        }
        let avg = sum / episode_len as f64;
        if avg >= accept_threshold {
            energy_set.push(linalg::scaled(probe.coords(), avg.sqrt()));
            break;
        }
    }

    // Refinement iterations k = 2..d: probe the orthogonal complement of the
    // accumulated set until the total energy certifies a constant-factor
    // action. The energy gate is checked at iteration boundaries, so small
    // dimensions (where the first direction already carries r^2/16) stop
    // immediately.
    while energy_sum(&energy_set) < energy_target && energy_set.len() < d {
        let k = (energy_set.len() + 1) as f64;
        session.set_phase(Phase::Warm(k as u32));
        let concentration_budget = 9.0 * (98f64.ln() + 4.0 * nf.ln());
        let rounds_per_action = scaled_len(
            cfg.constant_scale,
            64.0 * (d * d) as f64 * concentration_budget / (k * r.powi(4)),
        );
        let anchor =
            normalized_sum_action(&energy_set).expect("energy set is nonempty with positive norms");
        loop {
            if session.remaining() == 0 {
                return Ok(WarmResult {
                    action: anchor,
                    energy_set,
                });
            }
            let probe = sample_sphere_orthogonal(d, &energy_set, rng)?;
            let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
            let plus = Action::new(linalg::scaled(
                &linalg::add_scaled(anchor.coords(), 1.0, probe.coords()),
                inv_sqrt2,
            ))?;
            let minus = Action::new(linalg::scaled(
                &linalg::add_scaled(anchor.coords(), -1.0, probe.coords()),
                inv_sqrt2,
            ))?;
            let mut data = Vec::with_capacity(3 * rounds_per_action);
            let mut cut_short = false;
            'attempt: for a in [&plus, &minus, &anchor] {
                for _ in 0..rounds_per_action {
                    if session.remaining() == 0 {
                        cut_short = true;
                        break 'attempt;
                    }
                    let x = session.play(a.clone(), rng)?;
                    data.push((a.clone(), x));
                }
            }
            if cut_short {
                return Ok(WarmResult {
                    action: anchor,
                    energy_set,
                });
            }
            let problem = EstimatorProblem::new(data, FeasibleSet::ball(1.0)?)?;
            let mut estimate = constrained_least_squares(&problem, &SolverConfig::default(), rng)?;
            // The ball-constrained fit is sign-symmetric; canonicalize toward
            // the anchor so the accumulated set stays sign-coherent.
            if linalg::dot(&estimate, anchor.coords()) < 0.0 {
                estimate = linalg::scaled(&estimate, -1.0);
            }
            let coeff = linalg::dot(probe.coords(), &estimate);
            if coeff * coeff >= accept_threshold {
                energy_set.push(linalg::scaled(probe.coords(), coeff));
                break;
            }
        }
    }

    let action = normalized_sum_action(&energy_set).expect("nonempty energy set");
    Ok(WarmResult { action, energy_set })
}

fn attach_warm_output(
    env: &Environment,
    session: &mut BanditSession<'_>,
    result: &WarmResult,
) -> WarmOutput {
    let r = env.radius();
    let aligned = linalg::dot(result.action.coords(), env.theta_star()).powi(2);
    let output = WarmOutput {
        action: result.action.clone(),
        rounds: session.rounds_used(),
        success: aligned >= r * r / 64.0,
        energy_set: result.energy_set.clone(),
    };
    session.trajectory_mut().warm_output = Some(output.clone());
    output
}

/// Runs the adaptive warm start alone. The returned trajectory carries a
/// [`WarmOutput`] whose success flag compares the output against the ground
/// truth; the flag is diagnostic only and never feeds back into the policy.
pub fn warm_start_run(
    env: &Environment,
    cfg: &WarmStartConfig,
    rng: &mut RngState,
) -> Result<PolicyOutcome, PolicyError> {
    cfg.validate()?;
    let mut session = BanditSession::new(env, cfg.horizon);
    let result = warm_start_core(&mut session, cfg, rng)?;
    attach_warm_output(env, &mut session, &result);
    Ok(PolicyOutcome {
        trajectory: session.finish(),
        committed_action: None,
    })
}

/// Warm start that first spends `probe_budget` rounds estimating the radius
/// with uniform plays, then runs with the (deflated) estimate instead of the
/// true radius. The probe rounds count against the same horizon.
pub fn warm_start_run_estimated_radius(
    env: &Environment,
    cfg: &WarmStartConfig,
    probe_budget: usize,
    rng: &mut RngState,
) -> Result<PolicyOutcome, PolicyError> {
    cfg.validate()?;
    if probe_budget == 0 || probe_budget >= cfg.horizon {
        return Err(PolicyError::InvalidConfig(
            "probe budget must lie in [1, horizon)",
        ));
    }
    let mut session = BanditSession::new(env, cfg.horizon);
    let estimate = crate::estimator::radius_probe_on(&mut session, probe_budget, rng)?;
    // The warm start tolerates radii down to half the true norm; a clean
    // probe lands near r, so 0.75 sqrt(estimate) sits safely inside [r/2, r].
    let deflated = (0.75 * estimate.sqrt()).clamp(1e-3, 1.0);
    let run_cfg = WarmStartConfig {
        radius: deflated,
        ..cfg.clone()
    };
    let result = warm_start_core(&mut session, &run_cfg, rng)?;
    attach_warm_output(env, &mut session, &result);
    Ok(PolicyOutcome {
        trajectory: session.finish(),
        committed_action: None,
    })
}

// ---------------------------------------------------------------------------
// Explore-then-commit
// ---------------------------------------------------------------------------

fn etc_core(
    session: &mut BanditSession<'_>,
    anchor: &Action,
    cfg: &EtcConfig,
    rng: &mut RngState,
) -> Result<Option<Action>, PolicyError> {
    let remaining = session.remaining();
    if remaining == 0 {
        return Ok(None);
    }
    let d = session.dim();
    let nf = cfg.horizon as f64;
    let explore_len = scaled_len(
        cfg.constant_scale,
        4.0 * d as f64 * (nf * nf.ln()).sqrt() / (cfg.radius * cfg.radius),
    );
    if explore_len >= remaining {
        // Too little budget to explore and profit from it; playing the
        // anchor dominates any fixed alternative at its quality level.
        session.set_phase(Phase::EtcCommit);
        for _ in 0..remaining {
            session.play(anchor.clone(), rng)?;
        }
        return Ok(Some(anchor.clone()));
    }

    let mix_weight = 0.5f64.min(cfg.alpha.sqrt() / 4.0);
    let mut arms = Vec::with_capacity(2 * d);
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut coords = linalg::scaled(anchor.coords(), 1.0 - mix_weight);
            coords[k] += sign * mix_weight;
            arms.push(Action::new(coords)?);
        }
    }
    session.set_phase(Phase::EtcExplore);
    let mut data = Vec::with_capacity(explore_len);
    for t in 0..explore_len {
        let a = arms[t % arms.len()].clone();
        let x = session.play(a.clone(), rng)?;
        data.push((a, x));
    }

    // Sign-pinned constrained fit on the exploration data.
    let feasible =
        FeasibleSet::with_half_space(cfg.radius, anchor.coords(), cfg.radius * cfg.alpha.sqrt())?;
    let problem = EstimatorProblem::new(data, feasible)?;
    let estimate = constrained_least_squares(&problem, &SolverConfig::default(), rng)?;
    let commit = match linalg::normalized(&estimate) {
        Some(direction) => Action::new(direction)?,
        None => {
            log::warn!("degenerate least-squares estimate; committing to the anchor action");
            anchor.clone()
        }
    };
    session.set_phase(Phase::EtcCommit);
    let rest = session.remaining();
    for _ in 0..rest {
        session.play(commit.clone(), rng)?;
    }
    Ok(Some(commit))
}

/// Explore-then-commit from a given anchor action over `remaining_budget`
/// rounds. `cfg.horizon` is the total game length the phase lengths are
/// calibrated against; `cfg.alpha` is the quality the caller asserts for the
/// anchor.
pub fn etc_run(
    env: &Environment,
    anchor: &Action,
    cfg: &EtcConfig,
    remaining_budget: usize,
    rng: &mut RngState,
) -> Result<PolicyOutcome, PolicyError> {
    cfg.validate()?;
    let mut session = BanditSession::new(env, remaining_budget);
    let committed = etc_core(&mut session, anchor, cfg, rng)?;
    Ok(PolicyOutcome {
        trajectory: session.finish(),
        committed_action: committed,
    })
}

// ---------------------------------------------------------------------------
// Composition and baselines
// ---------------------------------------------------------------------------

/// Warm start, then explore-then-commit on whatever budget remains. The
/// trajectory length is exactly the configured horizon.
pub fn full_policy_run(
    env: &Environment,
    cfg: &FullPolicyConfig,
    rng: &mut RngState,
) -> Result<PolicyOutcome, PolicyError> {
    cfg.warm.validate()?;
    cfg.etc.validate()?;
    if cfg.warm.horizon != cfg.etc.horizon {
        return Err(PolicyError::InvalidConfig(
            "warm and commit stages must share one horizon",
        ));
    }
    let mut session = BanditSession::new(env, cfg.warm.horizon);
    let warm = warm_start_core(&mut session, &cfg.warm, rng)?;
    attach_warm_output(env, &mut session, &warm);
    let committed = etc_core(&mut session, &warm.action, &cfg.etc, rng)?;
    debug_assert_eq!(session.rounds_used(), cfg.warm.horizon);
    Ok(PolicyOutcome {
        trajectory: session.finish(),
        committed_action: committed,
    })
}

/// How the pure-exploration baseline turns its data into a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionEstimator {
    /// Normalized constrained least-squares fit on the unit ball (default).
    ConstrainedLeastSquares,
    /// Normalized leading eigenvector of the reward-weighted design matrix.
    Spectral,
}

// The baseline fits thousands of distinct actions, so the solver gets a
// tighter iteration budget than the grouped policy fits.
fn pure_explore_solver() -> SolverConfig {
    SolverConfig {
        max_iters: 600,
        grad_tolerance: 1e-7,
        restarts: 2,
        ..SolverConfig::default()
    }
}

fn uniform_core(
    session: &mut BanditSession<'_>,
    estimator: PredictionEstimator,
    rng: &mut RngState,
) -> Result<Action, PolicyError> {
    session.set_phase(Phase::UniformExplore);
    let d = session.dim();
    let rounds = session.remaining();
    let mut data = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let a = sample_unit_sphere(d, rng)?;
        let x = session.play(a.clone(), rng)?;
        data.push((a, x));
    }
    let fallback = data[0].0.clone();
    let problem = EstimatorProblem::new(data, FeasibleSet::ball(1.0)?)?;
    let estimate = match estimator {
        PredictionEstimator::ConstrainedLeastSquares => {
            constrained_least_squares(&problem, &pure_explore_solver(), rng)?
        }
        PredictionEstimator::Spectral => crate::estimator::spectral_init(&problem),
    };
    let prediction = match linalg::normalized(&estimate) {
        Some(direction) => Action::new(direction)?,
        None => fallback,
    };
    session.trajectory_mut().prediction = Some(prediction.clone());
    Ok(prediction)
}

/// Non-adaptive baseline: `n` i.i.d. uniform sphere actions, prediction from
/// the normalized constrained least-squares fit.
pub fn uniform_pure_exploration_run(
    env: &Environment,
    n: usize,
    rng: &mut RngState,
) -> Result<PolicyOutcome, PolicyError> {
    uniform_pure_exploration_run_with(env, n, PredictionEstimator::ConstrainedLeastSquares, rng)
}

/// Same design with an explicit choice of prediction estimator.
pub fn uniform_pure_exploration_run_with(
    env: &Environment,
    n: usize,
    estimator: PredictionEstimator,
    rng: &mut RngState,
) -> Result<PolicyOutcome, PolicyError> {
    if n == 0 {
        return Err(PolicyError::InvalidConfig("horizon must be >= 1"));
    }
    let mut session = BanditSession::new(env, n);
    uniform_core(&mut session, estimator, rng)?;
    Ok(PolicyOutcome {
        trajectory: session.finish(),
        committed_action: None,
    })
}

/// Prediction rule applied to a finished trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    /// A uniformly random logged action (the cumulative-to-simple reduction).
    UniformSample,
    /// The committed action when one exists, else a uniform sample.
    Committed,
}

pub fn predict_from_trajectory(
    trajectory: &Trajectory,
    mode: PredictionMode,
    rng: &mut RngState,
) -> Result<Action, PolicyError> {
    if trajectory.is_empty() {
        return Err(PolicyError::EmptyTrajectory);
    }
    if mode == PredictionMode::Committed {
        if let Some(a) = trajectory.committed_action() {
            return Ok(a.clone());
        }
    }
    let idx = rng.random_range(0..trajectory.steps.len());
    Ok(trajectory.steps[idx].action.clone())
}
