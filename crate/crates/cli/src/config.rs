//! Experiment configuration files.
//!
//! ```json
//! {
//!   "params": {
//!     "n": 500, "m": 20,
//!     "lambda_w": 2.0, "lambda_g": 6.0,
//!     "period": { "kind": "exponential", "rate": 1.0 }
//!   },
//!   "replicates": 10000,
//!   "master_seed": 1,
//!   "workers": 1,
//!   "condition": "community0_major",
//!   "outputs": "out/baseline-exp",
//!   "engine": "direct",
//!   "bins": 40
//! }
//! ```
//!
//! Rates are given either scaled (`lambda_w`, `lambda_g`) or per pair
//! (`beta_w`, `beta_g`), never both. Thresholds default to `ln n` and `ln m`.

use std::path::{Path, PathBuf};

use commsir::{Condition, InfectiousPeriod, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Direct,
    Embedding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_g: Option<f64>,
    pub period: InfectiousPeriod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub large_outbreak_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_threshold: Option<f64>,
}

impl ParamsConfig {
    pub fn model(&self) -> Result<ModelParams> {
        let invalid = |field: &str, msg: String| CliError::Validation(format!("params.{field}: {msg}"));
        let scaled = self.lambda_w.is_some() || self.lambda_g.is_some();
        let per_pair = self.beta_w.is_some() || self.beta_g.is_some();
        let params = match (scaled, per_pair) {
            (true, true) => {
                return Err(invalid("lambda_w", "lambda and beta rates are mutually exclusive".into()));
            }
            (false, false) => {
                return Err(invalid("lambda_w", "either lambda_w/lambda_g or beta_w/beta_g is required".into()))
            }
            (true, false) => ModelParams::from_scaled(
                self.n,
                self.m,
                self.lambda_w.unwrap_or(0.0),
                self.lambda_g.unwrap_or(0.0),
                self.period,
            ),
            (false, true) => {
                ModelParams::new(self.n, self.m, self.beta_w.unwrap_or(0.0), self.beta_g.unwrap_or(0.0), self.period)
            }
        }
        .map_err(|e| invalid(if scaled { "lambda_g" } else { "beta_g" }, e.to_string()))?;
        let large = self.large_outbreak_threshold.unwrap_or(params.large_outbreak_threshold);
        let global = self.global_threshold.unwrap_or(params.global_threshold);
        Ok(params.with_thresholds(large, global))
    }
}

fn default_workers() -> usize {
    1
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn default_bins() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ParamsConfig,
    pub replicates: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub condition: Condition,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|source| CliError::Json { path: path.display().to_string(), source })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<ModelParams> {
        if self.replicates < 1 {
            return Err(CliError::Validation("replicates: must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(CliError::Validation("workers: must be >= 1".into()));
        }
        if self.bins < 1 {
            return Err(CliError::Validation("bins: must be >= 1".into()));
        }
        let params = self.params.model()?;
        if self.engine == Engine::Embedding && params.m == 0 {
            return Err(CliError::Validation("engine: the embedding engine needs params.m >= 1".into()));
        }
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub replicates: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        if let Some(w) = self.workers {
            config.workers = w;
        }
        if let Some(o) = &self.out {
            config.outputs = o.clone();
        }
        if let Some(r) = self.replicates {
            config.replicates = r;
        }
        config.validate().map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINE: &str = r#"{
        "params": {"n": 500, "m": 20, "lambda_w": 2.0, "lambda_g": 6.0,
                   "period": {"kind": "exponential", "rate": 1.0}},
        "replicates": 100, "master_seed": 7, "condition": "community0_major"
    }"#;

    #[test]
    fn defaults_and_scaling() {
        let c: ExperimentConfig = serde_json::from_str(BASELINE).unwrap();
        assert_eq!((c.workers, c.bins, c.engine), (1, 40, Engine::Direct));
        let p = c.validate().unwrap();
        assert!((p.beta_w - 2.0 / 500.0).abs() < 1e-18);
        assert!((p.lambda_g() - 6.0).abs() < 1e-12);
        assert!((p.large_outbreak_threshold - 500f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_identity() {
        let c: ExperimentConfig = serde_json::from_str(BASELINE).unwrap();
        let again: ExperimentConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_json(), again.to_json());
    }

    #[test]
    fn rate_forms_are_exclusive() {
        let mixed = BASELINE.replace("\"lambda_g\": 6.0", "\"beta_g\": 0.001");
        let c: ExperimentConfig = serde_json::from_str(&mixed).unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("mutually exclusive"), "{err}");
        let none = BASELINE.replace("\"lambda_w\": 2.0, \"lambda_g\": 6.0,", "");
        let c: ExperimentConfig = serde_json::from_str(&none).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn field_level_messages() {
        let mut c: ExperimentConfig = serde_json::from_str(BASELINE).unwrap();
        c.replicates = 0;
        assert!(c.validate().unwrap_err().to_string().contains("replicates"));
        c.replicates = 1;
        c.params.lambda_w = Some(-1.0);
        assert!(c.validate().unwrap_err().to_string().contains("params."));
        assert!(serde_json::from_str::<ExperimentConfig>(&BASELINE.replace("\"master_seed\"", "\"seed\"")).is_err());
    }
}
