//! The JSON document passed with `--config`. Every section is optional; each
//! subcommand reads the sections it needs.

use std::path::Path;

use gwshm_core::autoencoder::{SearchSpace, TrainConfig};
use gwshm_core::features::DEFAULT_WINDOW_S;
use gwshm_core::scenario::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsutil;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Run seed. `--seed` overrides it; it overrides the section seeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub features: FeatureSettings,
    #[serde(default)]
    pub train: TrainSettings,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        fsutil::read_json(path)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map(Self::load).transpose().map(Option::unwrap_or_default)
    }

    pub fn scenario(&self) -> Result<&ScenarioConfig> {
        self.scenario.as_ref().ok_or_else(|| CliError::Config("config has no \"scenario\" section".into()))
    }

    pub fn scenario_seed(&self, cli: Option<u64>) -> Result<u64> {
        Ok(cli.or(self.seed).unwrap_or(self.scenario()?.seed))
    }

    pub fn train_seed(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(self.train.config.seed)
    }
}

/// Which records of a dataset get a feature row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordSource {
    /// Noisy copies when the dataset has any, clean records otherwise.
    #[default]
    Auto,
    Clean,
    Noisy,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    pub window_s: f64,
    /// Temperature of the per-path baseline reference record. Defaults to the
    /// scenario's propagation reference temperature.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_temperature_c: Option<f64>,
    pub source: RecordSource,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        FeatureSettings { window_s: DEFAULT_WINDOW_S, reference_temperature_c: None, source: RecordSource::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    #[serde(flatten)]
    pub config: TrainConfig,
    /// Train / validation / test fractions of the baseline rows.
    pub split: [f64; 3],
    /// Candidate space for `train --tune`.
    pub search: SearchSpace,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings { config: TrainConfig::default(), split: [0.5, 0.2, 0.3], search: SearchSpace::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_default_and_seed_precedence() {
        let c: PipelineConfig = serde_json::from_str(r#"{"train":{"batch_size":28,"seed":4}}"#).unwrap();
        assert_eq!(c.train.config.batch_size, 28);
        assert_eq!(c.train.config.epochs, 150);
        assert_eq!(c.train.split, [0.5, 0.2, 0.3]);
        assert_eq!(c.train_seed(None), 4);
        assert_eq!(c.train_seed(Some(9)), 9);
        assert!(c.scenario().is_err());
        let c: PipelineConfig = serde_json::from_str(r#"{"seed":3,"train":{"seed":4}}"#).unwrap();
        assert_eq!(c.train_seed(None), 3);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"bogus":1}"#).is_err());
    }
}
