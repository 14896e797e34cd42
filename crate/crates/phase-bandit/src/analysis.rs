//! Closed-form quantities for the quadratic-reward bandit and statistical
//! post-processing: sphere moments, per-round information gain and the
//! information ratio, concentration budgets for the quartic least-squares
//! fit, hard-instance radii, power-law exponent fits and Monte Carlo checks
//! of the geometric lemmas the policies rely on.

use thiserror::Error;

use crate::core::{Action, RngState};
use crate::linalg;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("radius {0} must lie in [0, 1]")]
    InvalidRadius(f64),
    #[error("information ratio is degenerate at d = 1 (the gap vanishes)")]
    DegenerateRatio,
    #[error("confidence level {0} must lie in (0, 1]")]
    InvalidConfidence(f64),
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("hard-instance radius {radius} exceeds 1 (n = {n} too small for d = {d})")]
    InfeasibleRadius { radius: f64, d: usize, n: usize },
    #[error("scaling fit needs at least 2 points")]
    TooFewPoints,
    #[error("scaling fit needs strictly positive coordinates, got ({x}, {y})")]
    NonPositivePoint { x: f64, y: f64 },
    #[error("scaling fit is degenerate: all x values coincide")]
    DegenerateFit,
    #[error("subspace dimension m = {m} must satisfy 1 <= m <= d = {d}")]
    InvalidSubspace { m: usize, d: usize },
}

fn check_dim_radius(d: usize, r: f64) -> Result<(), AnalysisError> {
    if d == 0 {
        return Err(AnalysisError::ZeroDimension);
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(AnalysisError::InvalidRadius(r));
    }
    Ok(())
}

/// `E <A, theta>^2 = r^2 / d` for `A` uniform on the unit sphere and
/// `||theta|| = r`.
pub fn sphere_moment2(d: usize, r: f64) -> Result<f64, AnalysisError> {
    check_dim_radius(d, r)?;
    Ok(r * r / d as f64)
}

/// `E <A, theta>^4 = 3 r^4 / (d^2 + 2d)`.
pub fn sphere_moment4(d: usize, r: f64) -> Result<f64, AnalysisError> {
    check_dim_radius(d, r)?;
    let df = d as f64;
    Ok(3.0 * r.powi(4) / (df * df + 2.0 * df))
}

/// Per-round information gain of a unit-sphere action about a uniformly
/// drawn parameter: `(r^4 / 2) * (3 / (d^2 + 2d) - 1 / d^2)`. Always at most
/// [`information_gain_bound`].
pub fn information_gain_approx(d: usize, r: f64) -> Result<f64, AnalysisError> {
    check_dim_radius(d, r)?;
    let df = d as f64;
    let value = 0.5 * r.powi(4) * (3.0 / (df * df + 2.0 * df) - 1.0 / (df * df));
    let bound = information_gain_bound(d, r)?;
    assert!(value <= bound + 1e-15, "gain {value} exceeds bound {bound}");
    Ok(value)
}

/// The coarse upper bound `r^4 / d^2` on the per-round information gain.
pub fn information_gain_bound(d: usize, r: f64) -> Result<f64, AnalysisError> {
    check_dim_radius(d, r)?;
    let df = d as f64;
    Ok(r.powi(4) / (df * df))
}

/// Expected per-round gap of an action with the given norm against a
/// uniformly drawn parameter of norm `r`: `r^2 (1 - ||a||^2 / d)`.
pub fn expected_gap(action_norm: f64, d: usize, r: f64) -> f64 {
    debug_assert!(d >= 1);
    debug_assert!((0.0..=1.0 + 1e-12).contains(&action_norm));
    r * r * (1.0 - action_norm * action_norm / d as f64)
}

/// Squared minimal expected gap over per-round information gain. Evaluates to
/// `(d - 1)(d + 2)` independently of `r`, which is order `d^2`.
pub fn information_ratio(d: usize, r: f64) -> Result<f64, AnalysisError> {
    if d <= 1 {
        return Err(AnalysisError::DegenerateRatio);
    }
    let gap = expected_gap(1.0, d, r);
    Ok(gap * gap / information_gain_approx(d, r)?)
}

/// High-probability concentration budget for the constrained quartic fit
/// from a design spanning `k` dimensions: `9 (ln(1/delta) + k ln(98 n))`.
pub fn beta_bound(k: usize, n: usize, delta: f64) -> Result<f64, AnalysisError> {
    if k == 0 || n == 0 {
        return Err(AnalysisError::ZeroCount);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(AnalysisError::InvalidConfidence(delta));
    }
    Ok(9.0 * ((1.0 / delta).ln() + k as f64 * (98.0 * n as f64).ln()))
}

/// Expectation form of the same budget: `9 (1 + k ln(98 n))`.
pub fn beta_bound_expectation(k: usize, n: usize) -> Result<f64, AnalysisError> {
    if k == 0 || n == 0 {
        return Err(AnalysisError::ZeroCount);
    }
    Ok(9.0 * (1.0 + k as f64 * (98.0 * n as f64).ln()))
}

/// The concentration statistic
/// `sum_t <A_t, theta_hat - theta_star>^2 <A_t, theta_hat + theta_star>^2`,
/// which the budget above bounds for least-squares fits.
pub fn concentration_statistic(
    data: &[(Action, f64)],
    theta_hat: &[f64],
    theta_star: &[f64],
) -> f64 {
    let diff = linalg::sub(theta_hat, theta_star);
    let sum = linalg::add_scaled(theta_hat, 1.0, theta_star);
    data.iter()
        .map(|(a, _)| {
            linalg::dot(a.coords(), &diff).powi(2) * linalg::dot(a.coords(), &sum).powi(2)
        })
        .sum()
}

/// Which regret notion a hard-instance radius targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegretKind {
    Cumulative,
    Simple,
}

/// Radius of the hard instance family for the requested regret notion:
/// `r^2 = sqrt((d^2 + 2d) / (96 e n))` for cumulative regret and
/// `r^2 = sqrt(d^3 / (32 n))` for simple regret. Errors when the radius
/// would exceed 1 (the construction needs a larger horizon).
pub fn lower_bound_radius(d: usize, n: usize, kind: RegretKind) -> Result<f64, AnalysisError> {
    if d == 0 {
        return Err(AnalysisError::ZeroDimension);
    }
    if n == 0 {
        return Err(AnalysisError::ZeroCount);
    }
    let df = d as f64;
    let nf = n as f64;
    let r_sq = match kind {
        RegretKind::Cumulative => ((df * df + 2.0 * df) / (96.0 * std::f64::consts::E * nf)).sqrt(),
        RegretKind::Simple => (df.powi(3) / (32.0 * nf)).sqrt(),
    };
    let radius = r_sq.sqrt();
    if radius > 1.0 {
        return Err(AnalysisError::InfeasibleRadius { radius, d, n });
    }
    Ok(radius)
}

/// Ordinary least squares of `log y` on `log x`.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ScalingFit, AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints);
    }
    for &(x, y) in points {
        if !(x > 0.0 && y > 0.0) {
            return Err(AnalysisError::NonPositivePoint { x, y });
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::DegenerateFit);
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual_rms = (logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        slope,
        intercept,
        residual_rms,
        points: points.to_vec(),
    })
}

/// Monte Carlo estimate of `P(<X, phi>^2 >= ||phi||^2 / m)` for `X` uniform
/// on the unit sphere of an `m`-dimensional subspace of `R^d` and `phi` in
/// that subspace. The probability does not depend on `phi`, so the first
/// coordinate axis is used.
pub fn sphere_projection_probability_check(
    d: usize,
    m: usize,
    trials: usize,
    rng: &mut RngState,
) -> Result<f64, AnalysisError> {
    if d == 0 {
        return Err(AnalysisError::ZeroDimension);
    }
    if m == 0 || m > d {
        return Err(AnalysisError::InvalidSubspace { m, d });
    }
    if trials == 0 {
        return Err(AnalysisError::ZeroCount);
    }
    let threshold = 1.0 / m as f64;
    let mut hits = 0usize;
    for _ in 0..trials {
        // Uniform on the m-sphere embedded as the first m coordinates of R^d.
        let x = crate::core::sample_unit_sphere(m, rng).expect("m >= 1");
        if x.coords()[0] * x.coords()[0] >= threshold {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Tail threshold from the Gaussian-average concentration bound:
/// `P(|1/n sum a_t Z_t| >= sqrt(2 sum a_t^2 ln(2/delta) / n)) <= delta`.
pub fn gaussian_tail_threshold(coeffs: &[f64], delta: f64) -> f64 {
    let n = coeffs.len() as f64;
    (2.0 * linalg::norm_sq(coeffs) * (2.0 / delta).ln() / n).sqrt()
}

/// Slack in the normalized-difference curvature inequality
/// `<theta/||theta|| - phi/||phi||, theta> <= 2 ||theta - phi||^2 / ||theta||`;
/// non-negative for all nonzero pairs.
pub fn curvature_gap(theta: &[f64], phi: &[f64]) -> f64 {
    let tn = linalg::norm(theta);
    let pn = linalg::norm(phi);
    debug_assert!(tn > 0.0 && pn > 0.0);
    let lhs = linalg::dot(
        &linalg::sub(
            &linalg::scaled(theta, 1.0 / tn),
            &linalg::scaled(phi, 1.0 / pn),
        ),
        theta,
    );
    2.0 * linalg::dist_sq(theta, phi) / tn - lhs
}
