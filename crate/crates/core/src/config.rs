//! Experiment configuration file.
//!
//! A single TOML document. `model` is either a preset name or an inline
//! table; estimator parameters live in their own sections:
//!
//! ```toml
//! model = "model1"
//! T = 10000
//! replications = 100
//! base_seed = 42
//! estimators = ["dfa", "dcca", "hxa", "ccf"]
//! output_dir = "out"
//!
//! [dcca]
//! s_min = 10
//! s_max = 2000
//! step = 10
//! order = 1
//!
//! [hxa]
//! tau_min = 1
//! tau_max = 100
//! ```
//!
//! An inline model replaces the preset name:
//!
//! ```toml
//! [model]
//! x = [{ kind = "fractional", param = 0.4, weight = 0.2 },
//!      { kind = "fractional", param = 0.3, weight = 1.0 }]
//! y = [{ kind = "ar1", param = 0.8, weight = 1.0 },
//!      { kind = "white", weight = 1.0 }]
//!
//! [model.covariance]
//! variances = [1.0, 1.0, 1.0, 1.0]
//! s23 = 0.9
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ScaleRange;
use crate::fir::default_truncation;
use crate::models::{ModelSpec, DEFAULT_CCF_TRUNCATION};

pub const MIN_SERIES_LEN: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelChoice {
    Preset(String),
    Inline(ModelSpec),
}

impl<'de> Deserialize<'de> for ModelChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;

        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Table(toml::Table),
        }
        match Raw::deserialize(d)? {
            Raw::Name(name) => Ok(ModelChoice::Preset(name)),
            Raw::Table(table) => toml::Value::Table(table)
                .try_into::<ModelSpec>()
                .map(ModelChoice::Inline)
                .map_err(|e| D::Error::custom(format!("model: {}", e.message()))),
        }
    }
}

impl ModelChoice {
    pub fn resolve(&self) -> Result<ModelSpec> {
        match self {
            ModelChoice::Preset(name) => ModelSpec::preset(name).ok_or_else(|| {
                Error::Config(format!(
                    "model: unknown preset `{name}` (expected model1, model2 or model3)"
                ))
            }),
            ModelChoice::Inline(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Dfa,
    Dcca,
    Hxa,
    Ccf,
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dfa" => Ok(Self::Dfa),
            "dcca" => Ok(Self::Dcca),
            "hxa" => Ok(Self::Hxa),
            "ccf" => Ok(Self::Ccf),
            other => Err(Error::Config(format!(
                "estimators: unknown estimator `{other}` (expected dfa, dcca, hxa or ccf)"
            ))),
        }
    }
}

/// Box sizes for DFA/DCCA; `s_max` defaults to `T/5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoxParams {
    pub s_min: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<usize>,
    pub step: usize,
    pub order: usize,
}

impl Default for BoxParams {
    fn default() -> Self {
        Self {
            s_min: 10,
            s_max: None,
            step: 10,
            order: 1,
        }
    }
}

impl BoxParams {
    pub fn range(&self, len: usize) -> ScaleRange {
        ScaleRange::new(self.s_min, self.s_max.unwrap_or(len / 5), self.step)
    }

    fn validate(&self, section: &str, len: usize) -> Result<()> {
        let r = self.range(len);
        if self.step == 0 {
            return Err(Error::Config(format!("{section}.step: must be positive")));
        }
        if r.min < self.order + 2 {
            return Err(Error::Config(format!(
                "{section}.s_min: {} is below order + 2 = {}",
                r.min,
                self.order + 2
            )));
        }
        if r.max > len / 2 || r.max < r.min {
            return Err(Error::Config(format!(
                "{section}.s_max: {} must lie in [s_min, T/2] = [{}, {}]",
                r.max,
                r.min,
                len / 2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HxaParams {
    pub tau_min: usize,
    pub tau_max: usize,
}

impl Default for HxaParams {
    fn default() -> Self {
        Self {
            tau_min: 1,
            tau_max: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcfParams {
    pub max_lag: usize,
    pub scatter_lags: Vec<i64>,
}

impl Default for CcfParams {
    fn default() -> Self {
        Self {
            max_lag: 50,
            scatter_lags: vec![0, 1, 5, 20],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelChoice,
    #[serde(rename = "T", default = "default_len")]
    pub len: usize,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    /// MA truncation `M`; `max(T, 10 000)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    /// Truncation `K` of the theoretical CCF sums.
    #[serde(default = "default_ccf_truncation")]
    pub ccf_truncation: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub dfa: BoxParams,
    #[serde(default)]
    pub dcca: BoxParams,
    #[serde(default)]
    pub hxa: HxaParams,
    #[serde(default)]
    pub ccf: CcfParams,
}

fn default_len() -> usize {
    10_000
}
fn default_reps() -> usize {
    100
}
fn default_seed() -> u64 {
    42
}
fn default_estimators() -> Vec<EstimatorKind> {
    vec![
        EstimatorKind::Dfa,
        EstimatorKind::Dcca,
        EstimatorKind::Hxa,
        EstimatorKind::Ccf,
    ]
}
fn default_ccf_truncation() -> usize {
    DEFAULT_CCF_TRUNCATION
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Zero-config setup for a named preset.
    pub fn for_preset(name: &str) -> Self {
        Self {
            model: ModelChoice::Preset(name.to_string()),
            len: default_len(),
            replications: default_reps(),
            base_seed: default_seed(),
            estimators: default_estimators(),
            truncation: None,
            ccf_truncation: default_ccf_truncation(),
            workers: None,
            output_dir: default_output_dir(),
            dfa: BoxParams::default(),
            dcca: BoxParams::default(),
            hxa: HxaParams::default(),
            ccf: CcfParams::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn truncation(&self) -> usize {
        self.truncation.unwrap_or_else(|| default_truncation(self.len))
    }

    pub fn has(&self, kind: EstimatorKind) -> bool {
        self.estimators.contains(&kind)
    }

    /// Checks every field against the preconditions of the operations it
    /// feeds; errors name the offending field.
    pub fn validate(&self) -> Result<ModelSpec> {
        let model = self.model.resolve()?;
        model
            .validate()
            .map_err(|e| Error::Config(format!("model: {e}")))?;
        self.validate_run(self.len)?;
        Ok(model)
    }

    /// Series-length, replication and estimator checks for a sample of
    /// `len` observations.
    pub fn validate_run(&self, len: usize) -> Result<()> {
        if len < MIN_SERIES_LEN {
            return Err(Error::Config(format!(
                "T: {len} is below the minimum of {MIN_SERIES_LEN}"
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications: must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimators: list must not be empty".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers: must be at least 1".into()));
        }
        if self.has(EstimatorKind::Dfa) {
            self.dfa.validate("dfa", len)?;
        }
        if self.has(EstimatorKind::Dcca) {
            self.dcca.validate("dcca", len)?;
        }
        if self.has(EstimatorKind::Hxa) {
            let h = &self.hxa;
            if h.tau_min < 1 || h.tau_min >= h.tau_max || h.tau_max > len / 10 {
                return Err(Error::Config(format!(
                    "hxa: need 1 <= tau_min < tau_max <= T/10 = {}, got [{}, {}]",
                    len / 10,
                    h.tau_min,
                    h.tau_max
                )));
            }
        }
        if self.has(EstimatorKind::Ccf) {
            if len <= 2 * self.ccf.max_lag {
                return Err(Error::Config(format!(
                    "ccf.max_lag: {} needs T > {}",
                    self.ccf.max_lag,
                    2 * self.ccf.max_lag
                )));
            }
            if self.ccf_truncation < self.ccf.max_lag + 100 {
                return Err(Error::Config(format!(
                    "ccf_truncation: {} must be at least ccf.max_lag + 100",
                    self.ccf_truncation
                )));
            }
            if let Some(l) = self.ccf.scatter_lags.iter().find(|l| l.unsigned_abs() as usize >= len) {
                return Err(Error::Config(format!("ccf.scatter_lags: |{l}| must be below T")));
            }
        }
        Ok(())
    }
}
