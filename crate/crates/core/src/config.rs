//! Episode and planner configuration. Every field has a default so partial
//! JSON files are accepted.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub fov_deg: f64,
    pub range_m: f64,
    /// Stairs farther than this are mapped as plain floor.
    pub stair_detect_range_m: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov_deg: 360.0,
            range_m: 3.0,
            stair_detect_range_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    /// Semantic weight of the frontier value.
    pub alpha: f64,
    /// Distance weight of the frontier value.
    pub beta: f64,
    pub d_max_m: f64,
    pub merge_radius_cells: i32,
    pub open_area_threshold_m2: f64,
    pub keypoint_dedup_m: f64,
    /// Radius of the virtual view used to score a frontier's semantics.
    pub semantic_radius_m: f64,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            d_max_m: 10.0,
            merge_radius_cells: 3,
            open_area_threshold_m2: 8.0,
            keypoint_dedup_m: 0.5,
            semantic_radius_m: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Weights of unexplored ratio, frontier density and time decay.
    pub er_weights: [f64; 3],
    pub alpha_min: f64,
    pub beta_max: f64,
    pub sigma_g_m: f64,
    /// Signed weight of the coverage-overlap term; negative penalises overlap.
    pub lambda_overlap: f64,
    /// Floor on the boundary score fed to the uncertainty kernel.
    pub boundary_base_score: f64,
    /// Step budget for the time-decay term; defaults to the episode budget.
    pub k_max: Option<u32>,
    pub coverage_fov_deg: f64,
    /// Defaults to the sensor range.
    pub coverage_range_m: Option<f64>,
    /// Weights used when dynamic weighting is disabled.
    pub static_alpha: f64,
    pub static_beta: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            er_weights: [1.0 / 3.0; 3],
            alpha_min: 1.0,
            beta_max: 1.0,
            sigma_g_m: 1.0,
            lambda_overlap: -1.0,
            boundary_base_score: 0.25,
            k_max: None,
            coverage_fov_deg: 360.0,
            coverage_range_m: None,
            static_alpha: 0.5,
            static_beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StuckConfig {
    pub n_rec: usize,
    pub d_rec_m: f64,
    pub d_split_m: f64,
    /// Optional longer comparison window (in multiples of `n_rec`). Unused
    /// when absent.
    pub long_window_factor: Option<usize>,
}

impl Default for StuckConfig {
    fn default() -> Self {
        Self {
            n_rec: 20,
            d_rec_m: 0.5,
            d_split_m: 3.0,
            long_window_factor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub waypoint_interval_m: f64,
    pub capture_radius_m: f64,
    /// Budget shared by near-frontier escape and staircase alignment.
    pub max_escape_steps: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            waypoint_interval_m: 1.5,
            capture_radius_m: 0.3,
            max_escape_steps: 15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasonerKind {
    #[default]
    Scripted,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub url: String,
    pub model: String,
    pub timeout_s: f64,
    /// Environment variable holding the bearer credential.
    pub api_key_env: String,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            url: "http://127.0.0.1:8080/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            timeout_s: 30.0,
            api_key_env: "AERR_REASONER_KEY".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReasonerConfig {
    pub kind: ReasonerKind,
    pub review_threshold: f64,
    pub remote: RemoteConfig,
}

impl Default for ReasonerConfig {
    fn default() -> Self {
        Self {
            kind: ReasonerKind::Scripted,
            review_threshold: 0.7,
            remote: RemoteConfig::default(),
        }
    }
}

/// Switches for the ablation axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ablation {
    pub recovery: bool,
    pub reminiscing: bool,
    pub dynamic_weights: bool,
    pub slow_thinking: bool,
}

impl Default for Ablation {
    fn default() -> Self {
        Self {
            recovery: true,
            reminiscing: true,
            dynamic_weights: true,
            slow_thinking: true,
        }
    }
}

impl Ablation {
    /// Short label such as `EXP+REC+REM`.
    pub fn label(&self) -> String {
        let mut parts = vec!["EXP"];
        if self.recovery {
            parts.push("REC");
        }
        if self.reminiscing {
            parts.push("REM");
        }
        let mut s = parts.join("+");
        s.push_str(if self.dynamic_weights { " dyn" } else { " static" });
        if self.slow_thinking {
            s.push_str(" +slow");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    pub success_radius_m: f64,
    pub seed: u64,
    /// Probability that a target sighting is dropped, per category.
    pub detection_noise: BTreeMap<String, f64>,
    pub sensor: SensorConfig,
    pub mapping: MappingConfig,
    pub planner: PlannerConfig,
    pub stuck: StuckConfig,
    pub recovery: RecoveryConfig,
    pub reasoner: ReasonerConfig,
    pub ablation: Ablation,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 500,
            success_radius_m: 0.1,
            seed: 0,
            detection_noise: BTreeMap::new(),
            sensor: SensorConfig::default(),
            mapping: MappingConfig::default(),
            planner: PlannerConfig::default(),
            stuck: StuckConfig::default(),
            recovery: RecoveryConfig::default(),
            reasoner: ReasonerConfig::default(),
            ablation: Ablation::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn k_max(&self) -> u32 {
        self.planner.k_max.unwrap_or(self.max_steps as u32)
    }

    pub fn coverage_range_m(&self) -> f64 {
        self.planner.coverage_range_m.unwrap_or(self.sensor.range_m)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        let w = self.planner.er_weights;
        if w.iter().any(|&s| s < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("er_weights must be nonnegative and sum to 1, got {w:?}"));
        }
        if self.k_max() == 0 {
            return bad("k_max must be positive".into());
        }
        if self.planner.alpha_min <= 0.0 || self.planner.beta_max <= 0.0 {
            return bad("alpha_min and beta_max must be positive".into());
        }
        if self.planner.sigma_g_m <= 0.0 {
            return bad("sigma_g_m must be positive".into());
        }
        if self.mapping.alpha < 0.0 || self.mapping.beta < 0.0 || self.mapping.d_max_m <= 0.0 {
            return bad("value weights must be nonnegative and d_max positive".into());
        }
        if self.stuck.n_rec < 2 || self.stuck.d_rec_m <= 0.0 || self.stuck.d_split_m <= 0.0 {
            return bad("stuck detector needs n_rec >= 2 and positive distances".into());
        }
        if self.recovery.waypoint_interval_m <= 0.0 {
            return bad("waypoint_interval_m must be positive".into());
        }
        if let Some((cat, p)) = self.detection_noise.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return bad(format!("detection noise for {cat} must be in [0, 1], got {p}"));
        }
        Ok(())
    }
}
