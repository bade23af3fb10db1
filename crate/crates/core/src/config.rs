//! Pipeline configuration: one JSON document holding every tunable, with
//! defaults matching the documented methodology.

use crate::corpus::{CohortSpec, SigmaMode};
use crate::features::{DiversityNorm, DiversityScope};
use crate::learn::MlParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("config validation failed: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputsConfig {
    pub corpus: PathBuf,
    pub sjr: PathBuf,
    /// Optional custom stop-list merged over the built-in one.
    pub stoplist: Option<PathBuf>,
}

impl Default for InputsConfig {
    fn default() -> Self {
        InputsConfig {
            corpus: PathBuf::from("corpus.jsonl"),
            sjr: PathBuf::from("sjr.csv"),
            stoplist: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
    /// 1 = unigrams only, 2 = unigrams + bigrams.
    pub max_ngram: usize,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig {
            min_df: 2,
            max_df_ratio: 0.95,
            max_ngram: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub topics: usize,
    /// Defaults to 50/K when absent.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            topics: 8,
            alpha: None,
            beta: 0.01,
            iterations: 500,
        }
    }
}

impl LdaConfig {
    pub fn alpha_value(&self) -> f64 {
        self.alpha
            .unwrap_or_else(|| crate::topics::default_alpha(self.topics))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiversityConfig {
    pub normalization: DiversityNorm,
    /// Cap on the affiliation-diversity category count.
    pub country_cap: usize,
    /// Aggregate over the whole feature window (default) or per paper then
    /// mean.
    pub scope: DiversityScope,
}

impl Default for DiversityConfig {
    fn default() -> Self {
        DiversityConfig {
            normalization: DiversityNorm::LnCategories,
            country_cap: 200,
            scope: DiversityScope::Window,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedDegreeMode {
    /// Sum of edge weights (the feature-pipeline default).
    #[default]
    Plain,
    /// Sum divided by the number of distinct co-authors.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkAggregation {
    /// One graph over the author's full feature window.
    #[default]
    Window,
    /// Mean of per-year graph metrics over the years the author published.
    YearlyMean,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub weighted_degree: WeightedDegreeMode,
    pub aggregation: NetworkAggregation,
    pub sigma: SigmaMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlConfig {
    /// Held-out test years; defaults to the last cohort year.
    pub test_years: Option<BTreeSet<i32>>,
    #[serde(flatten)]
    pub params: MlParams,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            test_years: None,
            params: MlParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: InputsConfig,
    /// Inclusive year range of admissible publication years.
    pub study_period: (i32, i32),
    pub cohort: CohortSpec,
    pub text: TextConfig,
    pub lda: LdaConfig,
    pub diversity: DiversityConfig,
    pub network: NetworkConfig,
    pub ml: MlConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Stage-output caching by config-section hash.
    pub cache: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: InputsConfig::default(),
            study_period: (1990, 2019),
            cohort: CohortSpec::default(),
            text: TextConfig::default(),
            lda: LdaConfig::default(),
            diversity: DiversityConfig::default(),
            network: NetworkConfig::default(),
            ml: MlConfig::default(),
            output_dir: PathBuf::from("out"),
            seed: 42,
            cache: true,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: PipelineConfig =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        // Paths in the config resolve relative to the config file.
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(config.rebase(base))
    }

    fn rebase(mut self, base: &Path) -> Self {
        let rebase_path = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };
        self.inputs.corpus = rebase_path(&self.inputs.corpus);
        self.inputs.sjr = rebase_path(&self.inputs.sjr);
        self.inputs.stoplist = self.inputs.stoplist.as_ref().map(|p| rebase_path(p));
        self.output_dir = rebase_path(&self.output_dir);
        self
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        let json = serde_json::to_string_pretty(self).expect("config serializes");
        std::fs::write(path, json).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Checks invariants and input-path existence.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.study_period.0 > self.study_period.1 {
            return Err(ConfigError::Invalid("study_period is reversed".into()));
        }
        self.cohort
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.cohort.first_pub_years.0 < self.study_period.0
            || self.cohort.first_pub_years.1 > self.study_period.1
        {
            return Err(ConfigError::Invalid(
                "cohort first_pub_years outside study_period".into(),
            ));
        }
        if self.lda.topics == 0 {
            return Err(ConfigError::Invalid("lda.topics must be >= 1".into()));
        }
        if self.lda.iterations == 0 {
            return Err(ConfigError::Invalid("lda.iterations must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.text.max_df_ratio) {
            return Err(ConfigError::Invalid(
                "text.max_df_ratio must be in [0,1]".into(),
            ));
        }
        if !(1..=2).contains(&self.text.max_ngram) {
            return Err(ConfigError::Invalid("text.max_ngram must be 1 or 2".into()));
        }
        if !self.inputs.corpus.exists() {
            return Err(ConfigError::Invalid(format!(
                "corpus file {} does not exist",
                self.inputs.corpus.display()
            )));
        }
        if !self.inputs.sjr.exists() {
            return Err(ConfigError::Invalid(format!(
                "sjr file {} does not exist",
                self.inputs.sjr.display()
            )));
        }
        if let Some(stoplist) = &self.inputs.stoplist {
            if !stoplist.exists() {
                return Err(ConfigError::Invalid(format!(
                    "stoplist file {} does not exist",
                    stoplist.display()
                )));
            }
        }
        Ok(())
    }

    /// Test years: configured, else the last cohort first-pub year.
    pub fn test_years(&self) -> BTreeSet<i32> {
        self.ml
            .test_years
            .clone()
            .unwrap_or_else(|| BTreeSet::from([self.cohort.first_pub_years.1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_json() {
        let config = PipelineConfig::default();
        let json = serde_json::to_string(&config).unwrap();
        let back: PipelineConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<PipelineConfig>(r#"{"bogus_knob": 1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn validation_catches_reversed_period() {
        let mut config = PipelineConfig::default();
        config.study_period = (2020, 2000);
        assert!(config.validate().is_err());
    }

    #[test]
    fn alpha_defaults_to_fifty_over_k() {
        let lda = LdaConfig::default();
        assert!((lda.alpha_value() - 6.25).abs() < 1e-12);
    }

    #[test]
    fn test_years_default_to_last_cohort_year() {
        let config = PipelineConfig::default();
        assert_eq!(config.test_years(), BTreeSet::from([2010]));
    }
}
