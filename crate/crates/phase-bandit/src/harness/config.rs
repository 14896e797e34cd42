//! Experiment configuration: a flat JSON document with exactly these fields;
//! unknown fields are rejected. CLI flags override file values.

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Which policy a sweep runs in every cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Warm start composed with explore-then-commit.
    Full,
    /// Warm start alone.
    WarmOnly,
    /// Explore-then-commit fed the true optimal action, isolating the commit
    /// stage from warm-start quality.
    EtcOracleWarm,
    /// Non-adaptive uniform design with a least-squares prediction.
    UniformPure,
    /// Radius estimation probe over the whole budget.
    RadiusProbe,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Full => "full",
            PolicyKind::WarmOnly => "warm_only",
            PolicyKind::EtcOracleWarm => "etc_oracle_warm",
            PolicyKind::UniformPure => "uniform_pure",
            PolicyKind::RadiusProbe => "radius_probe",
        }
    }

    pub(crate) fn stream_tag(self) -> u64 {
        match self {
            PolicyKind::Full => 1,
            PolicyKind::WarmOnly => 2,
            PolicyKind::EtcOracleWarm => 3,
            PolicyKind::UniformPure => 4,
            PolicyKind::RadiusProbe => 5,
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the parameter radius is chosen per (d, n) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    Fixed(f64),
    /// Radius of the hard instances for cumulative regret at the cell's d, n.
    LowerBoundCumulative,
    /// Radius of the hard instances for simple regret at the cell's d, n.
    LowerBoundSimple,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::policy")]
    pub policy: PolicyKind,
    #[serde(default = "defaults::d_grid")]
    pub d_grid: Vec<usize>,
    #[serde(default = "defaults::n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "defaults::r_mode")]
    pub r_mode: RadiusMode,
    #[serde(default = "defaults::noise_sigma")]
    pub noise_sigma: f64,
    #[serde(default = "defaults::constant_scale")]
    pub constant_scale: f64,
    #[serde(default = "defaults::seeds")]
    pub seeds: usize,
    #[serde(default = "defaults::base_seed")]
    pub base_seed: u64,
    #[serde(default = "defaults::output_path")]
    pub output_path: String,
}

mod defaults {
    use super::{PolicyKind, RadiusMode};

    pub fn policy() -> PolicyKind {
        PolicyKind::Full
    }
    pub fn d_grid() -> Vec<usize> {
        vec![5]
    }
    pub fn n_grid() -> Vec<usize> {
        vec![4096]
    }
    pub fn r_mode() -> RadiusMode {
        RadiusMode::Fixed(1.0)
    }
    pub fn noise_sigma() -> f64 {
        1.0
    }
    pub fn constant_scale() -> f64 {
        0.05
    }
    pub fn seeds() -> usize {
        8
    }
    pub fn base_seed() -> u64 {
        1
    }
    pub fn output_path() -> String {
        "regret_summary.csv".to_string()
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &str) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {path}: {e}")))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.d_grid.is_empty() || self.n_grid.is_empty() {
            return Err(HarnessError::Config("grids must be non-empty".into()));
        }
        if self.d_grid.contains(&0) || self.n_grid.contains(&0) {
            return Err(HarnessError::Config("grid values must be >= 1".into()));
        }
        if self.seeds == 0 {
            return Err(HarnessError::Config("seeds must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(HarnessError::Config(
                "noise_sigma must be finite and >= 0".into(),
            ));
        }
        if self.constant_scale.is_nan() || self.constant_scale <= 0.0 {
            return Err(HarnessError::Config("constant_scale must be > 0".into()));
        }
        if let RadiusMode::Fixed(r) = self.r_mode {
            if !(r > 0.0 && r <= 1.0) {
                return Err(HarnessError::Config(
                    "fixed radius must lie in (0, 1]".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(cfg.policy, PolicyKind::Full);
        assert_eq!(cfg.d_grid, vec![5]);
        assert_eq!(cfg.seeds, 8);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"polcy": "full"}"#);
        assert!(err.is_err());
    }

    #[test]
    fn radius_modes_round_trip() {
        let cfg = ExperimentConfig::from_json(r#"{"r_mode": {"fixed": 0.5}}"#).unwrap();
        assert_eq!(cfg.r_mode, RadiusMode::Fixed(0.5));
        let cfg = ExperimentConfig::from_json(r#"{"r_mode": "lower_bound_simple"}"#).unwrap();
        assert_eq!(cfg.r_mode, RadiusMode::LowerBoundSimple);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.r_mode, RadiusMode::LowerBoundSimple);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"seeds": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"d_grid": []}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"r_mode": {"fixed": 1.5}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"noise_sigma": -1.0}"#).is_err());
    }
}
