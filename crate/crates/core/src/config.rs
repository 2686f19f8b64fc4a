//! Run configuration: one TOML file covering every pipeline stage.
//!
//! Every field has a default, the CLI can override individual values, and
//! the fully resolved configuration is serialized into every output
//! directory so results are reproducible from their own metadata.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bundle::BundleEncoding;
use crate::error::{Error, Result};
use crate::eval::TaskKind;
use crate::features::FeatureSetKind;
use crate::preprocess::PreprocessConfig;
use crate::window::WindowSpec;

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_feature_kinds() -> Vec<FeatureSetKind> {
    FeatureSetKind::ALL.to_vec()
}

fn default_classifier() -> String {
    "lda".into()
}

fn default_tasks() -> Vec<TaskKind> {
    vec![TaskKind::Position, TaskKind::Gesture, TaskKind::Sequential]
}

fn default_exclude_gestures() -> Vec<u32> {
    vec![0]
}

fn default_ridge_gamma() -> f64 {
    crate::classify::DEFAULT_RIDGE_GAMMA
}

fn default_position_features() -> FeatureSetKind {
    FeatureSetKind::AccMed
}

fn default_gesture_features() -> FeatureSetKind {
    FeatureSetKind::EmgTd
}

fn default_preset() -> Option<String> {
    Some("bio-like".into())
}

fn default_scale() -> f64 {
    1.0
}

/// Feature-extraction section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesConfig {
    #[serde(default = "default_feature_kinds")]
    pub kinds: Vec<FeatureSetKind>,
    /// Dead-zone threshold for zero crossings and slope sign changes.
    #[serde(default)]
    pub zc_ssc_epsilon: f64,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        Self { kinds: default_feature_kinds(), zc_ssc_epsilon: 0.0 }
    }
}

/// Evaluation section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Classifier token: `lda`, `qda`, `knn[k]`, `rf[trees]`.
    #[serde(default = "default_classifier")]
    pub classifier: String,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<TaskKind>,
    /// Gesture ids excluded from gesture-target tasks (canonical bundles
    /// reserve 0 for the rest class).
    #[serde(default = "default_exclude_gestures")]
    pub exclude_gestures: Vec<u32>,
    #[serde(default = "default_ridge_gamma")]
    pub ridge_gamma: f64,
    /// Stage-one feature set for the sequential task and default for the
    /// position task.
    #[serde(default = "default_position_features")]
    pub position_features: FeatureSetKind,
    /// Gesture feature set for the gesture and sequential tasks.
    #[serde(default = "default_gesture_features")]
    pub gesture_features: FeatureSetKind,
    /// Keep per-window prediction records in result JSON.
    #[serde(default)]
    pub record_predictions: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            classifier: default_classifier(),
            tasks: default_tasks(),
            exclude_gestures: default_exclude_gestures(),
            ridge_gamma: default_ridge_gamma(),
            position_features: default_position_features(),
            gesture_features: default_gesture_features(),
            record_predictions: false,
        }
    }
}

/// Synthetic-generation section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSection {
    /// Preset name (`bio-like`, `hci-like`); ignored when `config_file`
    /// points at a full generator configuration (JSON).
    #[serde(default = "default_preset")]
    pub preset: Option<String>,
    #[serde(default)]
    pub config_file: Option<PathBuf>,
    /// Subject/repetition scale factor.
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub encoding: BundleEncoding,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self { preset: default_preset(), config_file: None, scale: default_scale(), encoding: BundleEncoding::Csv }
    }
}

/// The complete run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 picks the rayon default. Outputs are identical at
    /// every job count.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub features: FeaturesConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            jobs: 0,
            output_dir: default_output_dir(),
            preprocess: PreprocessConfig::default(),
            window: WindowSpec::default(),
            features: FeaturesConfig::default(),
            eval: EvalConfig::default(),
            synth: SynthSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn classifier_kind(&self) -> Result<crate::classify::ClassifierKind> {
        self.eval.classifier.parse()
    }

    /// Conventional stage directories under `output_dir`.
    pub fn bundle_dir(&self) -> PathBuf {
        self.output_dir.join("bundle")
    }

    pub fn preprocessed_dir(&self) -> PathBuf {
        self.output_dir.join("preprocessed")
    }

    pub fn features_dir(&self) -> PathBuf {
        self.output_dir.join("features")
    }

    pub fn results_dir(&self) -> PathBuf {
        self.output_dir.join("results")
    }

    /// Serialize the resolved configuration next to a stage's outputs.
    pub fn write_sidecar(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("run_config.json"), json + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_complete() {
        let c = RunConfig::default();
        assert_eq!(c.preprocess.notch_hz, 60.0);
        assert_eq!(c.window.length_ms, 200.0);
        assert_eq!(c.features.kinds.len(), 4);
        assert_eq!(c.eval.classifier, "lda");
        assert_eq!(c.eval.exclude_gestures, vec![0]);
        assert_eq!(c.synth.scale, 1.0);
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let text = r#"
            seed = 42

            [preprocess]
            notch_hz = 50.0

            [eval]
            classifier = "knn7"
        "#;
        let c: RunConfig = toml::from_str(text).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.preprocess.notch_hz, 50.0);
        assert_eq!(c.preprocess.notch_q, 30.0); // untouched default
        assert_eq!(
            c.classifier_kind().unwrap(),
            crate::classify::ClassifierKind::Knn { k: 7 }
        );
        let rendered = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&rendered).unwrap();
        assert_eq!(c, back);
    }
}
