use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cva::DEFAULT_DROP_TOL;
use crate::distance::{DEFAULT_L1_GATE, DEFAULT_TENSOR_EPS};
use crate::error::{Error, Result};
use crate::feedback::{FeedbackConfig, SceneChangeConfig};
use crate::frame::DEFAULT_LUMA;
use crate::segmentation::PostProcessConfig;

/// Every tunable of the pipeline. Loaded from TOML; all keys except
/// `min_count` are required in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Number of background frames `N`.
    pub bank_size: usize,
    /// A pixel is foreground when more than this many bank frames vote for
    /// it. Defaults to `bank_size - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_count: Option<usize>,
    /// Frames between rebuilds of the basis and common vector.
    pub recompute_stride: usize,
    pub drop_tol: f64,
    pub l1_gate: f64,
    pub tensor_eps: f64,
    /// RGB weights for colour input.
    pub luma: [f64; 3],
    pub seed: u64,
    pub post_process: PostProcessConfig,
    pub feedback: FeedbackConfig,
    pub scene_change: SceneChangeConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            bank_size: 35,
            min_count: None,
            recompute_stride: 1,
            drop_tol: DEFAULT_DROP_TOL,
            l1_gate: DEFAULT_L1_GATE,
            tensor_eps: DEFAULT_TENSOR_EPS,
            luma: DEFAULT_LUMA,
            seed: 0,
            post_process: PostProcessConfig::default(),
            feedback: FeedbackConfig::default(),
            scene_change: SceneChangeConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn min_count(&self) -> usize {
        self.min_count.unwrap_or(self.bank_size.saturating_sub(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.bank_size < 2 {
            return Err(Error::Config(format!(
                "bank_size must be at least 2, got {}",
                self.bank_size
            )));
        }
        if self.min_count() >= self.bank_size {
            return Err(Error::Config(format!(
                "min_count must be below bank_size ({}), got {}",
                self.bank_size,
                self.min_count()
            )));
        }
        if self.recompute_stride == 0 {
            return Err(Error::Config("recompute_stride must be at least 1".into()));
        }
        for (key, value) in [("drop_tol", self.drop_tol), ("tensor_eps", self.tensor_eps)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{key} must be positive, got {value}")));
            }
        }
        if !(self.l1_gate.is_finite() && self.l1_gate >= 0.0) {
            return Err(Error::Config(format!(
                "l1_gate must be nonnegative, got {}",
                self.l1_gate
            )));
        }
        self.post_process.validate()?;
        self.feedback.validate()?;
        Ok(())
    }
}
