//! Sweep execution: one policy over a (d, n) grid with seeded replications.

use rayon::prelude::*;

use super::config::{ExperimentConfig, PolicyKind, RadiusMode};
use super::HarnessError;
use crate::analysis::{fit_scaling_exponent, lower_bound_radius, RegretKind, ScalingFit};
use crate::core::{sample_unit_sphere, Action, Environment, RngState};
use crate::estimator::estimate_radius_squared;
use crate::linalg;
use crate::policies::{
    etc_run, full_policy_run, predict_from_trajectory, uniform_pure_exploration_run,
    warm_start_run, EtcConfig, FullPolicyConfig, PolicyOutcome, PredictionMode, WarmStartConfig,
};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "PHASE_BANDIT_WORKERS";

const STREAM_THETA: u64 = 0xA1;
const STREAM_RUN: u64 = 0xB2;
const STREAM_PREDICT: u64 = 0xC3;

/// Sweep axis for scaling fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    N,
    D,
}

/// Which aggregated regret a fit or plot uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Cumulative,
    Simple,
}

/// Identity of one summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCell {
    pub policy: PolicyKind,
    pub d: usize,
    pub n: usize,
    pub r: f64,
    pub sigma: f64,
    pub scale: f64,
}

/// Seed-aggregated statistics of one cell. Standard errors are present only
/// with at least two seeds; warm fields only for policies with a warm stage.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub seeds: usize,
    pub mean_cum_regret: f64,
    pub se_cum_regret: Option<f64>,
    pub mean_simple_regret: f64,
    pub se_simple_regret: Option<f64>,
    pub mean_warm_rounds: Option<f64>,
    /// Fraction of seeds where the warm start halted before the horizon with
    /// a constant-factor optimal action.
    pub warm_success_rate: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct RegretSummary {
    pub cells: Vec<(SummaryCell, CellStats)>,
}

struct RunMetrics {
    cum_regret: f64,
    simple_regret: f64,
    warm_rounds: Option<usize>,
    warm_success: Option<bool>,
}

fn resolve_radius(mode: RadiusMode, d: usize, n: usize) -> Result<f64, HarnessError> {
    match mode {
        RadiusMode::Fixed(r) => Ok(r),
        RadiusMode::LowerBoundCumulative => Ok(lower_bound_radius(d, n, RegretKind::Cumulative)?),
        RadiusMode::LowerBoundSimple => Ok(lower_bound_radius(d, n, RegretKind::Simple)?),
    }
}

fn worker_count() -> usize {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        if let Ok(k) = v.parse::<usize>() {
            if k >= 1 {
                return k;
            }
        }
        log::warn!("ignoring invalid {WORKERS_ENV}={v}");
    }
    std::thread::available_parallelism().map_or(1, |k| k.get())
}

/// Prediction used for the simple-regret column: the policy's explicit
/// prediction when present, else the committed action, else the warm-start
/// action, else a uniformly sampled logged action.
fn prediction_for_summary(
    outcome: &PolicyOutcome,
    rng: &mut RngState,
) -> Result<Action, HarnessError> {
    if let Some(p) = &outcome.trajectory.prediction {
        return Ok(p.clone());
    }
    if let Some(c) = &outcome.committed_action {
        return Ok(c.clone());
    }
    if let Some(w) = outcome.warm() {
        return Ok(w.action.clone());
    }
    Ok(predict_from_trajectory(
        &outcome.trajectory,
        PredictionMode::UniformSample,
        rng,
    )?)
}

fn run_one(
    cfg: &ExperimentConfig,
    d: usize,
    n: usize,
    r: f64,
    seed_idx: usize,
) -> Result<RunMetrics, HarnessError> {
    let base = RngState::new(cfg.base_seed, 0);
    // The parameter draw ignores the policy so different policies face the
    // same instances at matched (d, n, seed).
    let mut theta_rng = base.substream(&[STREAM_THETA, d as u64, n as u64, seed_idx as u64]);
    let direction = sample_unit_sphere(d, &mut theta_rng)?;
    let theta = linalg::scaled(direction.coords(), r);
    let env = Environment::with_radius(theta, r, cfg.noise_sigma)?;

    let run_parts = [
        STREAM_RUN,
        cfg.policy.stream_tag(),
        d as u64,
        n as u64,
        seed_idx as u64,
    ];
    let mut run_rng = base.substream(&run_parts);
    let outcome = match cfg.policy {
        PolicyKind::Full => {
            let full = FullPolicyConfig::standard(n, r, cfg.constant_scale);
            full_policy_run(&env, &full, &mut run_rng)?
        }
        PolicyKind::WarmOnly => {
            let warm = WarmStartConfig::new(n, r).with_scale(cfg.constant_scale);
            warm_start_run(&env, &warm, &mut run_rng)?
        }
        PolicyKind::EtcOracleWarm => {
            let oracle = Action::new(linalg::scaled(env.theta_star(), 1.0 / r))?;
            let etc = EtcConfig::new(n, r)
                .with_scale(cfg.constant_scale)
                .with_alpha(1.0 / 64.0);
            etc_run(&env, &oracle, &etc, n, &mut run_rng)?
        }
        PolicyKind::UniformPure => uniform_pure_exploration_run(&env, n, &mut run_rng)?,
        PolicyKind::RadiusProbe => {
            let probe = estimate_radius_squared(&env, n, 0.05, &mut run_rng)?;
            PolicyOutcome {
                trajectory: probe.trajectory,
                committed_action: None,
            }
        }
    };

    let mut predict_rng = base.substream(&[
        STREAM_PREDICT,
        cfg.policy.stream_tag(),
        d as u64,
        n as u64,
        seed_idx as u64,
    ]);
    let prediction = prediction_for_summary(&outcome, &mut predict_rng)?;
    let warm = outcome.warm();
    Ok(RunMetrics {
        cum_regret: env.cumulative_regret(&outcome.trajectory),
        simple_regret: env.simple_regret(&prediction),
        warm_rounds: warm.map(|w| w.rounds),
        warm_success: warm.map(|w| w.success && w.rounds < n),
    })
}

fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Runs the configured sweep. Infeasible lower-bound radii skip their cell
/// with a logged warning; rows are sorted by (policy, d, n).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RegretSummary, HarnessError> {
    cfg.validate()?;
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for &d in &cfg.d_grid {
        for &n in &cfg.n_grid {
            match resolve_radius(cfg.r_mode, d, n) {
                Ok(r) => cells.push((d, n, r)),
                Err(e) => log::warn!("skipping cell d={d}, n={n}: {e}"),
            }
        }
    }
    if cells.is_empty() {
        return Err(HarnessError::EmptySweep);
    }

    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.seeds).map(move |s| (c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let results: Vec<Result<RunMetrics, HarnessError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(c, s)| {
                let (d, n, r) = cells[c];
                run_one(cfg, d, n, r, s)
            })
            .collect()
    });

    // Aggregate sequentially in task order so the summary is independent of
    // scheduling.
    let mut per_cell: Vec<Vec<RunMetrics>> = (0..cells.len()).map(|_| Vec::new()).collect();
    for ((c, _), result) in tasks.into_iter().zip(results) {
        per_cell[c].push(result?);
    }

    let mut rows: Vec<(SummaryCell, CellStats)> = Vec::with_capacity(cells.len());
    for ((d, n, r), metrics) in cells.into_iter().zip(per_cell) {
        let cums: Vec<f64> = metrics.iter().map(|m| m.cum_regret).collect();
        let simples: Vec<f64> = metrics.iter().map(|m| m.simple_regret).collect();
        let (mean_cum, se_cum) = mean_and_se(&cums);
        let (mean_simple, se_simple) = mean_and_se(&simples);
        let warm_rounds: Vec<f64> = metrics
            .iter()
            .filter_map(|m| m.warm_rounds.map(|v| v as f64))
            .collect();
        let successes: Vec<bool> = metrics.iter().filter_map(|m| m.warm_success).collect();
        let stats = CellStats {
            seeds: metrics.len(),
            mean_cum_regret: mean_cum,
            se_cum_regret: se_cum,
            mean_simple_regret: mean_simple,
            se_simple_regret: se_simple,
            mean_warm_rounds: if warm_rounds.is_empty() {
                None
            } else {
                Some(warm_rounds.iter().sum::<f64>() / warm_rounds.len() as f64)
            },
            warm_success_rate: if successes.is_empty() {
                None
            } else {
                Some(successes.iter().filter(|&&s| s).count() as f64 / successes.len() as f64)
            },
        };
        rows.push((
            SummaryCell {
                policy: cfg.policy,
                d,
                n,
                r,
                sigma: cfg.noise_sigma,
                scale: cfg.constant_scale,
            },
            stats,
        ));
    }
    rows.sort_by(|a, b| {
        (a.0.policy, a.0.d, a.0.n)
            .partial_cmp(&(b.0.policy, b.0.d, b.0.n))
            .expect("total order")
    });
    Ok(RegretSummary { cells: rows })
}

/// Log-log fit of the chosen mean regret against the chosen axis.
pub fn fit_summary_scaling(
    summary: &RegretSummary,
    axis: Axis,
    metric: Metric,
) -> Result<ScalingFit, HarnessError> {
    let points: Vec<(f64, f64)> = summary
        .cells
        .iter()
        .map(|(cell, stats)| {
            let x = match axis {
                Axis::N => cell.n as f64,
                Axis::D => cell.d as f64,
            };
            let y = match metric {
                Metric::Cumulative => stats.mean_cum_regret,
                Metric::Simple => stats.mean_simple_regret,
            };
            (x, y)
        })
        .collect();
    Ok(fit_scaling_exponent(&points)?)
}

/// Runs the sweep and fits the scaling exponent along the chosen axis. The
/// off-axis grid must be a single value and the on-axis grid needs at least
/// three points.
pub fn sweep_and_fit(
    cfg: &ExperimentConfig,
    axis: Axis,
    metric: Metric,
) -> Result<(RegretSummary, ScalingFit), HarnessError> {
    let (on_axis, off_axis) = match axis {
        Axis::N => (&cfg.n_grid, &cfg.d_grid),
        Axis::D => (&cfg.d_grid, &cfg.n_grid),
    };
    if on_axis.len() < 3 {
        return Err(HarnessError::Config(
            "sweep axis needs at least 3 grid points".into(),
        ));
    }
    if off_axis.len() != 1 {
        return Err(HarnessError::Config(
            "off-axis grid must be a single value".into(),
        ));
    }
    let summary = run_experiment(cfg)?;
    let fit = fit_summary_scaling(&summary, axis, metric)?;
    Ok((summary, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_summary_fits_expected_exponents() {
        // Injected regret d * sqrt(n): slope 0.5 on the n axis, 1.0 on d.
        let mk = |policy, d: usize, n: usize, regret: f64| {
            (
                SummaryCell {
                    policy,
                    d,
                    n,
                    r: 1.0,
                    sigma: 1.0,
                    scale: 1.0,
                },
                CellStats {
                    seeds: 1,
                    mean_cum_regret: regret,
                    se_cum_regret: None,
                    mean_simple_regret: regret,
                    se_simple_regret: None,
                    mean_warm_rounds: None,
                    warm_success_rate: None,
                },
            )
        };
        let n_sweep = RegretSummary {
            cells: [256usize, 1024, 4096]
                .iter()
                .map(|&n| mk(PolicyKind::Full, 5, n, 5.0 * (n as f64).sqrt()))
                .collect(),
        };
        let fit = fit_summary_scaling(&n_sweep, Axis::N, Metric::Cumulative).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);

        let d_sweep = RegretSummary {
            cells: [2usize, 4, 8, 16]
                .iter()
                .map(|&d| mk(PolicyKind::Full, d, 1024, d as f64 * 32.0))
                .collect(),
        };
        let fit = fit_summary_scaling(&d_sweep, Axis::D, Metric::Cumulative).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_pure_noiseless_sweep_recovers() {
        let cfg = ExperimentConfig {
            policy: PolicyKind::UniformPure,
            d_grid: vec![2],
            n_grid: vec![100],
            r_mode: RadiusMode::Fixed(1.0),
            noise_sigma: 0.0,
            constant_scale: 0.05,
            seeds: 4,
            base_seed: 7,
            output_path: "unused.csv".into(),
        };
        let summary = run_experiment(&cfg).unwrap();
        assert_eq!(summary.cells.len(), 1);
        let (_, stats) = &summary.cells[0];
        assert!(
            stats.mean_simple_regret < 1e-3,
            "{}",
            stats.mean_simple_regret
        );
        assert!(stats.se_cum_regret.is_some());
        assert!(stats.mean_warm_rounds.is_none());
    }

    #[test]
    fn oracle_warm_dominates_full_on_average() {
        let base = ExperimentConfig {
            policy: PolicyKind::EtcOracleWarm,
            d_grid: vec![3],
            n_grid: vec![2048],
            r_mode: RadiusMode::Fixed(1.0),
            noise_sigma: 0.1,
            constant_scale: 0.05,
            seeds: 12,
            base_seed: 11,
            output_path: "unused.csv".into(),
        };
        let oracle = run_experiment(&base).unwrap();
        let full = run_experiment(&ExperimentConfig {
            policy: PolicyKind::Full,
            ..base
        })
        .unwrap();
        let oracle_mean = oracle.cells[0].1.mean_cum_regret;
        let full_mean = full.cells[0].1.mean_cum_regret;
        assert!(
            oracle_mean <= full_mean,
            "oracle {oracle_mean} vs full {full_mean}"
        );
    }

    #[test]
    fn infeasible_radius_cells_are_skipped() {
        let cfg = ExperimentConfig {
            policy: PolicyKind::UniformPure,
            d_grid: vec![8, 64],
            n_grid: vec![64],
            r_mode: RadiusMode::LowerBoundSimple,
            noise_sigma: 1.0,
            constant_scale: 0.05,
            seeds: 1,
            base_seed: 3,
            output_path: "unused.csv".into(),
        };
        // d = 64 at n = 64 needs r > 1, so only the d = 8 cell survives.
        let summary = run_experiment(&cfg).unwrap();
        assert_eq!(summary.cells.len(), 1);
        assert_eq!(summary.cells[0].0.d, 8);
    }

    #[test]
    fn sweep_validation() {
        let cfg = ExperimentConfig {
            d_grid: vec![2, 3],
            n_grid: vec![16, 32, 64],
            noise_sigma: 0.0,
            seeds: 1,
            ..ExperimentConfig::default()
        };
        assert!(sweep_and_fit(&cfg, Axis::N, Metric::Cumulative).is_err());
    }
}
