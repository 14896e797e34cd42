//! Command-line front end for the bandit phase-retrieval harness.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use phase_bandit::analysis;
use phase_bandit::core::RngState;
use phase_bandit::harness::{
    emit_csv, emit_plot, run_experiment, summary_to_csv_string, sweep_and_fit, Axis,
    ExperimentConfig, HarnessError, Metric, PlotOptions, PolicyKind, RadiusMode,
};
use phase_bandit::linalg;

#[derive(Parser)]
#[command(
    name = "phase-bandit",
    version,
    about = "Bandit phase-retrieval simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write the summary CSV.
    Simulate(ConfigArgs),
    /// Run a sweep along one axis and fit the scaling exponent.
    Sweep(SweepArgs),
    /// Print closed-form moment and information tables.
    Moments(MomentsArgs),
    /// Run the fast invariant suites (exit code 3 on failure).
    Check,
    /// Render a summary CSV to an SVG plot.
    Plot(PlotArgs),
}

/// Experiment settings; flags override the config file field by field.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON config file mirroring the experiment fields.
    #[arg(long)]
    config: Option<String>,
    /// full | warm_only | etc_oracle_warm | uniform_pure | radius_probe
    #[arg(long)]
    policy: Option<String>,
    /// Comma-separated dimensions, e.g. 4,8,16.
    #[arg(long, value_delimiter = ',')]
    d_grid: Option<Vec<usize>>,
    /// Comma-separated horizons, e.g. 1024,4096.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    /// fixed:<r> | lower_bound_cumulative | lower_bound_simple
    #[arg(long)]
    r_mode: Option<String>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    constant_scale: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    output_path: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// n | d
    #[arg(long)]
    axis: String,
    /// cumulative | simple
    #[arg(long, default_value = "cumulative")]
    metric: String,
}

#[derive(Args)]
struct MomentsArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,20")]
    d_list: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
}

#[derive(Args)]
struct PlotArgs {
    /// Input CSV in the summary schema.
    #[arg(long)]
    input: String,
    /// n | d
    #[arg(long, default_value = "n")]
    x_axis: String,
    /// Output SVG path.
    #[arg(long)]
    output: String,
    #[arg(long, default_value_t = false)]
    log_log: bool,
    /// cumulative | simple
    #[arg(long, default_value = "cumulative")]
    metric: String,
}

fn parse_policy(text: &str) -> Result<PolicyKind, HarnessError> {
    match text {
        "full" => Ok(PolicyKind::Full),
        "warm_only" => Ok(PolicyKind::WarmOnly),
        "etc_oracle_warm" => Ok(PolicyKind::EtcOracleWarm),
        "uniform_pure" => Ok(PolicyKind::UniformPure),
        "radius_probe" => Ok(PolicyKind::RadiusProbe),
        other => Err(HarnessError::Config(format!("unknown policy {other:?}"))),
    }
}

fn parse_r_mode(text: &str) -> Result<RadiusMode, HarnessError> {
    if let Some(v) = text.strip_prefix("fixed:") {
        let r: f64 = v
            .parse()
            .map_err(|_| HarnessError::Config(format!("bad fixed radius {v:?}")))?;
        return Ok(RadiusMode::Fixed(r));
    }
    match text {
        "lower_bound_cumulative" => Ok(RadiusMode::LowerBoundCumulative),
        "lower_bound_simple" => Ok(RadiusMode::LowerBoundSimple),
        other => Err(HarnessError::Config(format!("unknown r-mode {other:?}"))),
    }
}

fn parse_axis(text: &str) -> Result<Axis, HarnessError> {
    match text {
        "n" => Ok(Axis::N),
        "d" => Ok(Axis::D),
        other => Err(HarnessError::Config(format!("unknown axis {other:?}"))),
    }
}

fn parse_metric(text: &str) -> Result<Metric, HarnessError> {
    match text {
        "cumulative" => Ok(Metric::Cumulative),
        "simple" => Ok(Metric::Simple),
        other => Err(HarnessError::Config(format!("unknown metric {other:?}"))),
    }
}

fn build_config(args: &ConfigArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &args.policy {
        cfg.policy = parse_policy(p)?;
    }
    if let Some(d) = &args.d_grid {
        cfg.d_grid = d.clone();
    }
    if let Some(n) = &args.n_grid {
        cfg.n_grid = n.clone();
    }
    if let Some(r) = &args.r_mode {
        cfg.r_mode = parse_r_mode(r)?;
    }
    if let Some(s) = args.noise_sigma {
        cfg.noise_sigma = s;
    }
    if let Some(c) = args.constant_scale {
        cfg.constant_scale = c;
    }
    if let Some(s) = args.seeds {
        cfg.seeds = s;
    }
    if let Some(b) = args.base_seed {
        cfg.base_seed = b;
    }
    if let Some(o) = &args.output_path {
        cfg.output_path = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code_for(err: &HarnessError) -> u8 {
    match err {
        HarnessError::Config(_) | HarnessError::CsvParse { .. } | HarnessError::EmptySweep => 1,
        _ => 2,
    }
}

fn cmd_simulate(args: &ConfigArgs) -> Result<(), HarnessError> {
    let cfg = build_config(args)?;
    let summary = run_experiment(&cfg)?;
    emit_csv(&summary, &cfg.output_path)?;
    print!("{}", summary_to_csv_string(&summary));
    eprintln!("wrote {}", cfg.output_path);
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), HarnessError> {
    let cfg = build_config(&args.config)?;
    let axis = parse_axis(&args.axis)?;
    let metric = parse_metric(&args.metric)?;
    let (summary, fit) = sweep_and_fit(&cfg, axis, metric)?;
    emit_csv(&summary, &cfg.output_path)?;
    println!(
        "slope {:.4}  intercept {:.4}  residual_rms {:.4}  points {}",
        fit.slope,
        fit.intercept,
        fit.residual_rms,
        fit.points.len()
    );
    eprintln!("wrote {}", cfg.output_path);
    Ok(())
}

fn cmd_moments(args: &MomentsArgs) -> Result<(), HarnessError> {
    println!("d      moment2        moment4        info_gain      gain_bound     info_ratio");
    for &d in &args.d_list {
        let m2 = analysis::sphere_moment2(d, args.r)?;
        let m4 = analysis::sphere_moment4(d, args.r)?;
        let gain = analysis::information_gain_approx(d, args.r)?;
        let bound = analysis::information_gain_bound(d, args.r)?;
        let ratio = if d >= 2 {
            format!("{:.6}", analysis::information_ratio(d, args.r)?)
        } else {
            "-".to_string()
        };
        println!("{d:<6} {m2:<14.8} {m4:<14.8} {gain:<14.10} {bound:<14.10} {ratio}");
    }
    Ok(())
}

fn cmd_plot(args: &PlotArgs) -> Result<(), HarnessError> {
    let opts = PlotOptions {
        x_axis: parse_axis(&args.x_axis)?,
        metric: parse_metric(&args.metric)?,
        log_log: args.log_log,
    };
    emit_plot(&args.input, opts, &args.output)?;
    eprintln!("wrote {}", args.output);
    Ok(())
}

// ---------------------------------------------------------------------------
// check: fast invariant battery
// ---------------------------------------------------------------------------

struct CheckReport {
    failures: usize,
}

impl CheckReport {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        let status = if ok { "PASS" } else { "FAIL" };
        println!("check {name}: {status} ({detail})");
        if !ok {
            self.failures += 1;
        }
    }
}

fn cmd_check() -> Result<u8, HarnessError> {
    let mut report = CheckReport { failures: 0 };
    let mut rng = RngState::new(0xC0FFEE, 0);

    // Sphere moments against closed forms, 1e5 samples.
    for d in [2usize, 5] {
        let trials = 100_000;
        let mut theta = vec![0.0; d];
        theta[0] = 1.0;
        let mut sum2 = 0.0;
        let mut sum4 = 0.0;
        for _ in 0..trials {
            let a = phase_bandit::core::sample_unit_sphere(d, &mut rng)?;
            let v = linalg::dot(a.coords(), &theta).powi(2);
            sum2 += v;
            sum4 += v * v;
        }
        let m2 = analysis::sphere_moment2(d, 1.0)?;
        let m4 = analysis::sphere_moment4(d, 1.0)?;
        let mean2 = sum2 / trials as f64;
        let mean4 = sum4 / trials as f64;
        let se2 = ((m4 - m2 * m2).max(0.0) / trials as f64).sqrt();
        report.record(
            &format!("sphere-moment2 d={d}"),
            (mean2 - m2).abs() <= 4.0 * se2,
            format!("{mean2:.5} vs {m2:.5}"),
        );
        report.record(
            &format!("sphere-moment4 d={d}"),
            (mean4 - m4).abs() <= 0.02 * m4.max(0.01),
            format!("{mean4:.5} vs {m4:.5}"),
        );
    }

    // Information-gain inequality and ratio window.
    let mut gain_ok = true;
    for d in 1..=256 {
        for i in 1..=10 {
            let r = i as f64 / 10.0;
            if analysis::information_gain_approx(d, r)? > analysis::information_gain_bound(d, r)? {
                gain_ok = false;
            }
        }
    }
    report.record("information-gain bound", gain_ok, "d in 1..=256".into());
    let mut ratio_ok = true;
    for d in 4..=128 {
        let scaled = analysis::information_ratio(d, 1.0)? / (d * d) as f64;
        if !(0.5..=2.0).contains(&scaled) {
            ratio_ok = false;
        }
    }
    report.record("information-ratio window", ratio_ok, "d in 4..=128".into());

    // Curvature inequality on random pairs.
    let mut curvature_ok = true;
    for _ in 0..10_000 {
        let theta: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let phi: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        if linalg::norm(&theta) < 1e-6 || linalg::norm(&phi) < 1e-6 {
            continue;
        }
        if analysis::curvature_gap(&theta, &phi) < -1e-12 {
            curvature_ok = false;
        }
    }
    report.record("curvature inequality", curvature_ok, "10^4 pairs".into());

    // Subspace-projection probability floor.
    for m in [1usize, 2, 10] {
        let p = analysis::sphere_projection_probability_check(16.max(m), m, 20_000, &mut rng)?;
        report.record(
            &format!("projection floor m={m}"),
            p >= 0.15,
            format!("{p:.4}"),
        );
    }

    // Gaussian tail bound.
    let coeffs = vec![1.0, -0.5, 0.25, 0.8];
    let delta = 0.1;
    let threshold = analysis::gaussian_tail_threshold(&coeffs, delta);
    let mut violations = 0;
    let reps = 5000;
    for _ in 0..reps {
        let avg = coeffs
            .iter()
            .map(|a| a * rng.standard_normal())
            .sum::<f64>()
            / coeffs.len() as f64;
        if avg.abs() >= threshold {
            violations += 1;
        }
    }
    let freq = violations as f64 / reps as f64;
    report.record("gaussian tail bound", freq <= delta, format!("{freq:.4}"));

    // Determinism of a small sweep.
    let cfg = ExperimentConfig {
        policy: PolicyKind::Full,
        d_grid: vec![2],
        n_grid: vec![128],
        r_mode: RadiusMode::Fixed(1.0),
        noise_sigma: 0.5,
        constant_scale: 0.02,
        seeds: 3,
        base_seed: 99,
        output_path: String::new(),
    };
    let a = summary_to_csv_string(&run_experiment(&cfg)?);
    let b = summary_to_csv_string(&run_experiment(&cfg)?);
    report.record("sweep determinism", a == b, "byte-identical reruns".into());

    Ok(if report.failures == 0 { 0 } else { 3 })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result: Result<u8, HarnessError> = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args).map(|()| 0),
        Command::Sweep(args) => cmd_sweep(args).map(|()| 0),
        Command::Moments(args) => cmd_moments(args).map(|()| 0),
        Command::Check => cmd_check(),
        Command::Plot(args) => cmd_plot(args).map(|()| 0),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
