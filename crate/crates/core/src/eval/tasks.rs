//! The three classification tasks over leave-one-trial-out folds.
//!
//! * position: all gestures pooled, the limb position is the class label;
//! * gesture (within-position): one gesture classifier per position,
//!   trained and tested inside that position, correctness pooled per fold;
//! * sequential: a position classifier routes each test window to the
//!   position-specific gesture classifier.
//!
//! Accuracy is per-window (no majority voting across a trial). The
//! aggregate mean averages every (subject, fold) accuracy; the standard
//! deviation is taken across per-subject means.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use super::folds::make_loto_folds;
use crate::classify::{self, ClassifierKind, FitOptions, TrainedModel};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSetKind, RowLabels};
use crate::seeding::derive_seed;

const STAGE_POSITION: u64 = 0;
const STAGE_GESTURE: u64 = 1;
/// Stands in for the position id in seed paths when positions are absent.
const NO_POSITION_TAG: u64 = u64::MAX;

/// Which of the three tasks a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Position,
    Gesture,
    Sequential,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Position => f.write_str("position"),
            TaskKind::Gesture => f.write_str("gesture"),
            TaskKind::Sequential => f.write_str("sequential"),
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" => Ok(TaskKind::Position),
            "gesture" => Ok(TaskKind::Gesture),
            "sequential" => Ok(TaskKind::Sequential),
            other => Err(Error::Config(format!(
                "unknown task '{other}' (expected position, gesture, sequential)"
            ))),
        }
    }
}

/// Which column of a feature matrix serves as the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelTarget {
    Gesture,
    Position,
}

/// How the sequential task picks the position of a test window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionRouting {
    /// Stage-one classifier prediction (the real pipeline).
    Predicted,
    /// Ground-truth position labels; turns the task into the
    /// within-position upper bound.
    Oracle,
}

/// Options shared by all task runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOptions {
    pub classifier: ClassifierKind,
    pub seed: u64,
    /// Gesture ids removed from gesture-target tasks. Canonical bundles
    /// reserve id 0 for the rest class, which gesture tasks skip by
    /// default; position training keeps every gesture.
    pub exclude_gestures: BTreeSet<u32>,
    pub ridge_gamma: f64,
    /// Keep per-window prediction records in the result.
    pub record_predictions: bool,
    /// Names for confusion-matrix rows; missing ids fall back to
    /// `G{id}` / `P{id}`.
    pub gesture_names: BTreeMap<u32, String>,
    pub position_names: BTreeMap<u32, String>,
}

impl Default for TaskOptions {
    fn default() -> Self {
        Self {
            classifier: ClassifierKind::Lda,
            seed: 0,
            exclude_gestures: BTreeSet::from([0]),
            ridge_gamma: classify::DEFAULT_RIDGE_GAMMA,
            record_predictions: false,
            gesture_names: BTreeMap::new(),
            position_names: BTreeMap::new(),
        }
    }
}

impl TaskOptions {
    fn fit_options(&self, seed: u64) -> FitOptions {
        FitOptions { seed, ridge_gamma: self.ridge_gamma }
    }

    fn class_names(&self, target: LabelTarget, classes: &[u32]) -> Vec<String> {
        let (map, prefix) = match target {
            LabelTarget::Gesture => (&self.gesture_names, 'G'),
            LabelTarget::Position => (&self.position_names, 'P'),
        };
        classes
            .iter()
            .map(|id| map.get(id).cloned().unwrap_or_else(|| format!("{prefix}{id:02}")))
            .collect()
    }
}

/// Accuracy of one fold of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAccuracy {
    pub repetition: u32,
    pub correct: u64,
    pub total: u64,
    pub accuracy: f64,
}

/// All fold accuracies of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectAccuracies {
    pub subject: u32,
    pub folds: Vec<FoldAccuracy>,
}

impl SubjectAccuracies {
    pub fn mean(&self) -> f64 {
        if self.folds.is_empty() {
            return 0.0;
        }
        self.folds.iter().map(|f| f.accuracy).sum::<f64>() / self.folds.len() as f64
    }
}

/// One scored test window (kept when
/// [`TaskOptions::record_predictions`] is set).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub labels: RowLabels,
    pub truth: u32,
    pub predicted: u32,
}

/// Complete outcome of one task run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: TaskKind,
    pub feature_set: FeatureSetKind,
    /// Stage-one feature set (sequential task only).
    pub position_feature_set: Option<FeatureSetKind>,
    pub classifier: ClassifierKind,
    pub seed: u64,
    pub excluded_gestures: Vec<u32>,
    pub subjects: Vec<SubjectAccuracies>,
    /// Mean over every (subject, fold) accuracy, in [0, 1].
    pub mean: f64,
    /// Sample standard deviation across per-subject means.
    pub std_dev: f64,
    pub confusion: ConfusionMatrix,
    /// Test windows routed to a fallback gesture classifier because the
    /// predicted position had none (sequential task only).
    pub dispatch_fallbacks: u64,
    pub predictions: Option<Vec<PredictionRecord>>,
}

impl TaskResult {
    pub fn per_subject_means(&self) -> Vec<f64> {
        self.subjects.iter().map(SubjectAccuracies::mean).collect()
    }
}

/// Fit a classifier on the selected rows of a matrix.
///
/// Exposed so leakage checks can refit fold models directly; the task
/// runners below go through this same path.
pub fn fit_on_rows(
    matrix: &FeatureMatrix,
    indices: &[usize],
    target: LabelTarget,
    kind: ClassifierKind,
    opts: &FitOptions,
) -> Result<TrainedModel> {
    let mut rows = Vec::with_capacity(indices.len());
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        let row = &matrix.rows[i];
        rows.push(row.values.as_slice());
        labels.push(match target {
            LabelTarget::Gesture => row.labels.gesture,
            LabelTarget::Position => row.labels.position.ok_or_else(|| {
                Error::Task("row without position label in a position-target fit".into())
            })?,
        });
    }
    classify::fit(kind, &rows, &labels, opts)
}

struct CellOutcome {
    subject: u32,
    fold: FoldAccuracy,
    confusion: ConfusionMatrix,
    fallbacks: u64,
    records: Vec<PredictionRecord>,
}

/// Deterministic reduction of per-cell outcomes into a [`TaskResult`].
#[allow(clippy::too_many_arguments)]
fn assemble(
    task: TaskKind,
    feature_set: FeatureSetKind,
    position_feature_set: Option<FeatureSetKind>,
    opts: &TaskOptions,
    classes: Vec<u32>,
    class_names: Vec<String>,
    cells: Vec<CellOutcome>,
) -> TaskResult {
    let mut subjects: Vec<SubjectAccuracies> = Vec::new();
    let mut confusion = ConfusionMatrix::new(classes, class_names);
    let mut fallbacks = 0u64;
    let mut records = Vec::new();
    for cell in cells {
        match subjects.last_mut() {
            Some(s) if s.subject == cell.subject => s.folds.push(cell.fold),
            _ => subjects
                .push(SubjectAccuracies { subject: cell.subject, folds: vec![cell.fold] }),
        }
        confusion.merge(&cell.confusion);
        fallbacks += cell.fallbacks;
        records.extend(cell.records);
    }

    let fold_accuracies: Vec<f64> =
        subjects.iter().flat_map(|s| s.folds.iter().map(|f| f.accuracy)).collect();
    let mean = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len().max(1) as f64;
    let subject_means: Vec<f64> = subjects.iter().map(SubjectAccuracies::mean).collect();
    let std_dev = if subject_means.len() < 2 {
        0.0
    } else {
        let center = subject_means.iter().sum::<f64>() / subject_means.len() as f64;
        (subject_means.iter().map(|m| (m - center) * (m - center)).sum::<f64>()
            / (subject_means.len() - 1) as f64)
            .sqrt()
    };

    TaskResult {
        task,
        feature_set,
        position_feature_set,
        classifier: opts.classifier,
        seed: opts.seed,
        excluded_gestures: opts.exclude_gestures.iter().copied().collect(),
        subjects,
        mean,
        std_dev,
        confusion,
        dispatch_fallbacks: fallbacks,
        predictions: opts.record_predictions.then_some(records),
    }
}

fn fold_accuracy(repetition: u32, correct: u64, total: u64) -> Result<FoldAccuracy> {
    if total == 0 {
        return Err(Error::Task(format!("fold for repetition {repetition} has no test rows")));
    }
    Ok(FoldAccuracy { repetition, correct, total, accuracy: correct as f64 / total as f64 })
}

/// Multi-gesture position recognition: all gestures pooled, position is the
/// class label. Unavailable for datasets without position labels.
pub fn run_position_task(features: &FeatureMatrix, opts: &TaskOptions) -> Result<TaskResult> {
    if !features.has_positions() {
        return Err(Error::Task("task unavailable: no position labels".into()));
    }
    let classes: Vec<u32> = features
        .rows
        .iter()
        .filter_map(|r| r.labels.position)
        .collect::<BTreeSet<u32>>()
        .into_iter()
        .collect();
    let class_names = opts.class_names(LabelTarget::Position, &classes);

    let mut cells: Vec<(u32, super::folds::Fold)> = Vec::new();
    for subject in features.subjects() {
        let plan = make_loto_folds(features, subject, |_| true)?;
        cells.extend(plan.folds.into_iter().map(|f| (subject, f)));
    }

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|(subject, fold)| -> Result<CellOutcome> {
            let seed =
                derive_seed(opts.seed, &[STAGE_POSITION, *subject as u64, fold.held_out_repetition as u64]);
            let model = fit_on_rows(
                features,
                &fold.train,
                LabelTarget::Position,
                opts.classifier,
                &opts.fit_options(seed),
            )?;
            let mut confusion = ConfusionMatrix::new(classes.clone(), class_names.clone());
            let mut correct = 0u64;
            let mut records = Vec::new();
            for &i in &fold.test {
                let row = &features.rows[i];
                let truth = row.labels.position.expect("validated above");
                let predicted = model.predict(&row.values)?;
                confusion.record(truth, predicted)?;
                if predicted == truth {
                    correct += 1;
                }
                if opts.record_predictions {
                    records.push(PredictionRecord { labels: row.labels, truth, predicted });
                }
            }
            Ok(CellOutcome {
                subject: *subject,
                fold: fold_accuracy(fold.held_out_repetition, correct, fold.test.len() as u64)?,
                confusion,
                fallbacks: 0,
                records,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(TaskKind::Position, features.kind, None, opts, classes, class_names, outcomes))
}

/// Gesture classes left after exclusions, sorted.
fn gesture_classes(features: &FeatureMatrix, opts: &TaskOptions) -> Result<Vec<u32>> {
    let classes: Vec<u32> = features
        .rows
        .iter()
        .map(|r| r.labels.gesture)
        .filter(|g| !opts.exclude_gestures.contains(g))
        .collect::<BTreeSet<u32>>()
        .into_iter()
        .collect();
    if classes.len() < 2 {
        return Err(Error::Task(format!(
            "{} gesture classes remain after exclusions; need at least 2",
            classes.len()
        )));
    }
    Ok(classes)
}

/// Train one gesture classifier per position present in the fold's train
/// rows; keys are position ids.
fn fit_gesture_models_per_position(
    features: &FeatureMatrix,
    train: &[usize],
    subject: u32,
    repetition: u32,
    opts: &TaskOptions,
) -> Result<BTreeMap<u32, TrainedModel>> {
    let mut by_position: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &i in train {
        let p = features.rows[i]
            .labels
            .position
            .ok_or_else(|| Error::Task("row without position label".into()))?;
        by_position.entry(p).or_default().push(i);
    }
    by_position
        .into_iter()
        .map(|(p, indices)| {
            let seed = derive_seed(
                opts.seed,
                &[STAGE_GESTURE, subject as u64, repetition as u64, p as u64],
            );
            let model = fit_on_rows(
                features,
                &indices,
                LabelTarget::Gesture,
                opts.classifier,
                &opts.fit_options(seed),
            )
            .map_err(|e| {
                Error::Task(format!(
                    "subject {subject}, repetition {repetition}, position {p}: {e}"
                ))
            })?;
            Ok((p, model))
        })
        .collect()
}

/// Within-position gesture recognition.
///
/// With position labels, the task runs once per position inside each fold
/// and pools per-fold correctness counts across positions; without them a
/// single position is assumed.
pub fn run_within_position_task(
    features: &FeatureMatrix,
    opts: &TaskOptions,
) -> Result<TaskResult> {
    let classes = gesture_classes(features, opts)?;
    let class_names = opts.class_names(LabelTarget::Gesture, &classes);
    let keep = |i: usize| !opts.exclude_gestures.contains(&features.rows[i].labels.gesture);
    let has_positions = features.has_positions();

    let mut cells: Vec<(u32, super::folds::Fold)> = Vec::new();
    for subject in features.subjects() {
        let plan = make_loto_folds(features, subject, keep)?;
        cells.extend(plan.folds.into_iter().map(|f| (subject, f)));
    }

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|(subject, fold)| -> Result<CellOutcome> {
            let rep = fold.held_out_repetition;
            let mut confusion = ConfusionMatrix::new(classes.clone(), class_names.clone());
            let mut correct = 0u64;
            let mut records = Vec::new();

            if has_positions {
                let models =
                    fit_gesture_models_per_position(features, &fold.train, *subject, rep, opts)?;
                for &i in &fold.test {
                    let row = &features.rows[i];
                    let p = row.labels.position.expect("checked by has_positions");
                    let model = models.get(&p).ok_or_else(|| {
                        Error::Task(format!(
                            "no training rows for position {p} in repetition {rep} \
                             of subject {subject}"
                        ))
                    })?;
                    let truth = row.labels.gesture;
                    let predicted = model.predict(&row.values)?;
                    confusion.record(truth, predicted)?;
                    if predicted == truth {
                        correct += 1;
                    }
                    if opts.record_predictions {
                        records.push(PredictionRecord { labels: row.labels, truth, predicted });
                    }
                }
            } else {
                let seed = derive_seed(
                    opts.seed,
                    &[STAGE_GESTURE, *subject as u64, rep as u64, NO_POSITION_TAG],
                );
                let model = fit_on_rows(
                    features,
                    &fold.train,
                    LabelTarget::Gesture,
                    opts.classifier,
                    &opts.fit_options(seed),
                )?;
                for &i in &fold.test {
                    let row = &features.rows[i];
                    let truth = row.labels.gesture;
                    let predicted = model.predict(&row.values)?;
                    confusion.record(truth, predicted)?;
                    if predicted == truth {
                        correct += 1;
                    }
                    if opts.record_predictions {
                        records.push(PredictionRecord { labels: row.labels, truth, predicted });
                    }
                }
            }

            Ok(CellOutcome {
                subject: *subject,
                fold: fold_accuracy(rep, correct, fold.test.len() as u64)?,
                confusion,
                fallbacks: 0,
                records,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(TaskKind::Gesture, features.kind, None, opts, classes, class_names, outcomes))
}

type PairKey = (u32, u32, Option<u32>, u32, usize);

fn pair_key(labels: &RowLabels) -> PairKey {
    (labels.subject, labels.gesture, labels.position, labels.repetition, labels.window_index)
}

/// Sequential two-stage classification: predict the position from the
/// stage-one features of the same (trial, window index), then dispatch to
/// that position's gesture classifier.
///
/// Both stages use the same classifier family. With
/// [`PositionRouting::Oracle`] the router returns the true position, which
/// must reproduce the within-position result exactly.
pub fn run_sequential_task(
    position_features: &FeatureMatrix,
    gesture_features: &FeatureMatrix,
    opts: &TaskOptions,
    routing: PositionRouting,
) -> Result<TaskResult> {
    if !gesture_features.has_positions() || !position_features.has_positions() {
        return Err(Error::Task("task unavailable: no position labels".into()));
    }
    if position_features.subjects() != gesture_features.subjects() {
        return Err(Error::Task(
            "position and gesture feature matrices cover different subjects".into(),
        ));
    }
    let classes = gesture_classes(gesture_features, opts)?;
    let class_names = opts.class_names(LabelTarget::Gesture, &classes);
    let keep =
        |i: usize| !opts.exclude_gestures.contains(&gesture_features.rows[i].labels.gesture);

    // Pair stage-one rows by (trial, window index).
    let paired: BTreeMap<PairKey, usize> = position_features
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (pair_key(&r.labels), i))
        .collect();

    // Position-stage training rows per subject (all gestures pooled).
    let mut position_rows_by_subject: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, row) in position_features.rows.iter().enumerate() {
        position_rows_by_subject.entry(row.labels.subject).or_default().push(i);
    }

    let mut cells: Vec<(u32, super::folds::Fold)> = Vec::new();
    for subject in gesture_features.subjects() {
        let plan = make_loto_folds(gesture_features, subject, keep)?;
        cells.extend(plan.folds.into_iter().map(|f| (subject, f)));
    }

    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|(subject, fold)| -> Result<CellOutcome> {
            let rep = fold.held_out_repetition;

            // Stage one: position model on this subject's stage-one rows
            // with the held-out repetition removed (same derivation as the
            // standalone position task, so the fold models coincide).
            let position_model = if routing == PositionRouting::Predicted {
                let train: Vec<usize> = position_rows_by_subject
                    .get(subject)
                    .into_iter()
                    .flatten()
                    .copied()
                    .filter(|&i| position_features.rows[i].labels.repetition != rep)
                    .collect();
                let seed =
                    derive_seed(opts.seed, &[STAGE_POSITION, *subject as u64, rep as u64]);
                Some(fit_on_rows(
                    position_features,
                    &train,
                    LabelTarget::Position,
                    opts.classifier,
                    &opts.fit_options(seed),
                )?)
            } else {
                None
            };

            // Stage two: per-position gesture models on the same folds as
            // the within-position task (identical seeds, identical rows).
            let models =
                fit_gesture_models_per_position(gesture_features, &fold.train, *subject, rep, opts)?;
            let fallback_position = models
                .iter()
                .max_by_key(|(p, _)| {
                    (
                        fold.train
                            .iter()
                            .filter(|&&i| gesture_features.rows[i].labels.position == Some(**p))
                            .count(),
                        std::cmp::Reverse(**p),
                    )
                })
                .map(|(p, _)| *p)
                .expect("at least one trained position");

            let mut confusion = ConfusionMatrix::new(classes.clone(), class_names.clone());
            let mut correct = 0u64;
            let mut fallbacks = 0u64;
            let mut records = Vec::new();
            for &i in &fold.test {
                let row = &gesture_features.rows[i];
                let routed = match (&position_model, routing) {
                    (_, PositionRouting::Oracle) => row.labels.position.expect("checked"),
                    (Some(model), PositionRouting::Predicted) => {
                        let key = pair_key(&row.labels);
                        let pi = paired.get(&key).ok_or_else(|| {
                            Error::Task(format!(
                                "no paired stage-one window for trial s{:03} g{:03} r{:03} \
                                 window {} (window counts differ between modalities?)",
                                row.labels.subject,
                                row.labels.gesture,
                                row.labels.repetition,
                                row.labels.window_index
                            ))
                        })?;
                        model.predict(&position_features.rows[*pi].values)?
                    }
                    (None, PositionRouting::Predicted) => unreachable!(),
                };
                let model = match models.get(&routed) {
                    Some(m) => m,
                    None => {
                        fallbacks += 1;
                        log::warn!(
                            "no gesture classifier for predicted position {routed}; \
                             falling back to position {fallback_position}"
                        );
                        &models[&fallback_position]
                    }
                };
                let truth = row.labels.gesture;
                let predicted = model.predict(&row.values)?;
                confusion.record(truth, predicted)?;
                if predicted == truth {
                    correct += 1;
                }
                if opts.record_predictions {
                    records.push(PredictionRecord { labels: row.labels, truth, predicted });
                }
            }

            Ok(CellOutcome {
                subject: *subject,
                fold: fold_accuracy(rep, correct, fold.test.len() as u64)?,
                confusion,
                fallbacks,
                records,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(assemble(
        TaskKind::Sequential,
        gesture_features.kind,
        Some(position_features.kind),
        opts,
        classes,
        class_names,
        outcomes,
    ))
}
