//! Native classifier implementations with a uniform fit/predict contract.
//!
//! Four families: linear and quadratic discriminant analysis, k-nearest
//! neighbours, and random forest. All of them consume z-scored features
//! (the standardizer is fitted on training rows only), every tie anywhere
//! breaks toward the lowest class label, and (data, seed) fully determines
//! the fitted model regardless of thread count.

mod discriminant;
mod forest;
mod knn;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use discriminant::{DiscriminantModel, DiscriminantShape};
pub use forest::ForestModel;
pub use knn::KnnModel;

pub const DEFAULT_KNN_K: usize = 5;
pub const DEFAULT_RF_TREES: usize = 10;
pub const DEFAULT_RIDGE_GAMMA: f64 = 1e-6;

/// Classifier family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ClassifierKind {
    Lda,
    Qda,
    Knn { k: usize },
    RandomForest { trees: usize },
}

impl ClassifierKind {
    pub fn knn_default() -> Self {
        ClassifierKind::Knn { k: DEFAULT_KNN_K }
    }

    pub fn forest_default() -> Self {
        ClassifierKind::RandomForest { trees: DEFAULT_RF_TREES }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClassifierKind::Knn { k } if k < 1 => {
                Err(Error::Config("knn needs k >= 1".into()))
            }
            ClassifierKind::RandomForest { trees } if trees < 1 => {
                Err(Error::Config("random forest needs at least 1 tree".into()))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in report tables.
    pub fn short_label(&self) -> &'static str {
        match self {
            ClassifierKind::Lda => "LDA",
            ClassifierKind::Qda => "QDA",
            ClassifierKind::Knn { .. } => "kNN",
            ClassifierKind::RandomForest { .. } => "RF",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierKind::Lda => f.write_str("lda"),
            ClassifierKind::Qda => f.write_str("qda"),
            ClassifierKind::Knn { k } => write!(f, "knn{k}"),
            ClassifierKind::RandomForest { trees } => write!(f, "rf{trees}"),
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    /// Parse `lda`, `qda`, `knn`, `rf`, with optional numeric suffix for
    /// the parameterized families (`knn7`, `rf100`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lda" => return Ok(ClassifierKind::Lda),
            "qda" => return Ok(ClassifierKind::Qda),
            "knn" => return Ok(ClassifierKind::knn_default()),
            "rf" => return Ok(ClassifierKind::forest_default()),
            _ => {}
        }
        if let Some(num) = s.strip_prefix("knn") {
            if let Ok(k) = num.parse() {
                return Ok(ClassifierKind::Knn { k });
            }
        }
        if let Some(num) = s.strip_prefix("rf") {
            if let Ok(trees) = num.parse() {
                return Ok(ClassifierKind::RandomForest { trees });
            }
        }
        Err(Error::Config(format!(
            "unknown classifier '{s}' (expected lda, qda, knn[k], rf[trees])"
        )))
    }
}

/// Per-feature z-scoring fitted on training rows only.
///
/// Zero-variance features keep divisor 1 so they pass through after
/// centering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Fit("no rows to standardize".into()))?;
        let dim = first.len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for row in rows {
            for (m, v) in means.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in vars.iter_mut().zip(*row).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        let stds = vars
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Fit-time options shared by all families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub seed: u64,
    /// Ridge strength for (co)variance regularization:
    /// `gamma * trace(S)/d` is added to the diagonal.
    pub ridge_gamma: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { seed: 0, ridge_gamma: DEFAULT_RIDGE_GAMMA }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ModelParams {
    Discriminant(DiscriminantModel),
    Knn(KnnModel),
    Forest(ForestModel),
}

/// A fitted classifier; immutable, serializable, and shareable across
/// threads. Serialization round-trips preserve predictions exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    /// Class labels, sorted ascending; predictions always come from this
    /// set and index order defines tie-break priority.
    pub classes: Vec<u32>,
    pub standardizer: Standardizer,
    pub rng_seed: u64,
    params: ModelParams,
}

/// Fit a classifier of the requested family.
///
/// Requirements: at least two distinct classes, finite features, and (for
/// QDA) at least two rows per class.
pub fn fit(
    kind: ClassifierKind,
    rows: &[&[f64]],
    labels: &[u32],
    opts: &FitOptions,
) -> Result<TrainedModel> {
    kind.validate()?;
    if rows.len() != labels.len() {
        return Err(Error::Fit(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    if rows.is_empty() {
        return Err(Error::Fit("no training rows".into()));
    }
    let dim = rows[0].len();
    if dim == 0 {
        return Err(Error::Fit("zero-dimensional feature rows".into()));
    }
    for row in rows {
        if row.len() != dim {
            return Err(Error::Fit("training rows have inconsistent dimensions".into()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Fit("non-finite feature value in training rows".into()));
        }
    }

    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Fit("training data contains a single class".into()));
    }

    let standardizer = Standardizer::fit(rows)?;
    let std_rows: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.transform(r)).collect();
    // Class indices into the sorted label list.
    let class_indices: Vec<usize> =
        labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();

    let params = match kind {
        ClassifierKind::Lda => ModelParams::Discriminant(discriminant::fit(
            DiscriminantShape::Linear,
            &std_rows,
            &class_indices,
            classes.len(),
            opts.ridge_gamma,
        )?),
        ClassifierKind::Qda => ModelParams::Discriminant(discriminant::fit(
            DiscriminantShape::Quadratic,
            &std_rows,
            &class_indices,
            classes.len(),
            opts.ridge_gamma,
        )?),
        ClassifierKind::Knn { k } => {
            ModelParams::Knn(knn::fit(k, std_rows.clone(), class_indices.clone())?)
        }
        ClassifierKind::RandomForest { trees } => ModelParams::Forest(forest::fit(
            trees,
            &std_rows,
            &class_indices,
            classes.len(),
            opts.seed,
        )?),
    };

    Ok(TrainedModel { kind, classes, standardizer, rng_seed: opts.seed, params })
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        self.standardizer.dim()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Predict(format!(
                "feature vector has dimension {}, model was trained on {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Predict the class label of one feature vector (raw, unstandardized).
    pub fn predict(&self, x: &[f64]) -> Result<u32> {
        self.check_dim(x)?;
        let z = self.standardizer.transform(x);
        let class_index = match &self.params {
            ModelParams::Discriminant(m) => argmax_lowest(&m.discriminants(&z)),
            ModelParams::Knn(m) => m.predict(&z),
            ModelParams::Forest(m) => m.predict(&z),
        };
        Ok(self.classes[class_index])
    }

    /// Row-wise [`TrainedModel::predict`], order-preserving.
    pub fn predict_batch(&self, rows: &[&[f64]]) -> Result<Vec<u32>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    /// Per-class Gaussian discriminant values (LDA/QDA only), in class
    /// order. Errors for the distance- and tree-based families.
    pub fn gaussian_discriminants(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        match &self.params {
            ModelParams::Discriminant(m) => {
                Ok(m.discriminants(&self.standardizer.transform(x)))
            }
            _ => Err(Error::Predict(format!(
                "{} has no Gaussian discriminant",
                self.kind
            ))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Index of the maximum, ties resolved toward the lowest index.
pub(crate) fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}
