//! Pipeline stages behind the CLI.
//!
//! Stages communicate exclusively through on-disk artifacts (bundle,
//! preprocessed bundle, feature store, result JSON), so each stage can be
//! re-run independently. Re-running a stage with identical inputs, config
//! and seed produces byte-identical outputs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bundle::{load_bundle, save_bundle, BundleEncoding};
use crate::config::RunConfig;
use crate::dataset::GestureSubset;
use crate::error::{Error, Result};
use crate::eval::{
    run_position_task, run_sequential_task, run_within_position_task, PositionRouting, TaskKind,
    TaskOptions, TaskResult,
};
use crate::features::{extract_dataset, ExtractOptions, FeatureMatrix, FeatureSetKind};
use crate::preprocess::preprocess_dataset;
use crate::report::{self, ResultFile};
use crate::store::{read_matrix, read_meta, write_store, StoreMeta};
use crate::synth;

/// Validate a bundle and rewrite it in canonical form (optionally
/// re-encoding the sample files). This is the entry point for externally
/// converted recordings.
pub fn run_convert(input: &Path, output: &Path, encoding: BundleEncoding) -> Result<usize> {
    let dataset = load_bundle(input)?;
    save_bundle(&dataset, output, encoding)?;
    Ok(dataset.trials.len())
}

/// Resolve the generator configuration (preset or JSON file), apply scale
/// and seed, generate, and write the bundle.
pub fn run_synth(cfg: &RunConfig) -> Result<(PathBuf, u64)> {
    let base = match &cfg.synth.config_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Synth(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)?
        }
        None => {
            let name = cfg.synth.preset.as_deref().ok_or_else(|| {
                Error::Synth("neither a preset name nor a generator config file given".into())
            })?;
            synth::preset(name)?
        }
    };
    let config = base.with_scale(cfg.synth.scale)?.with_seed(cfg.seed);
    let dataset = synth::generate(&config)?;
    let dir = cfg.bundle_dir();
    save_bundle(&dataset, &dir, cfg.synth.encoding)?;
    cfg.write_sidecar(&dir)?;
    Ok((dir, config.trial_count()))
}

/// Filter every stream of a bundle and write the preprocessed bundle.
pub fn run_preprocess(cfg: &RunConfig, input: Option<&Path>) -> Result<PathBuf> {
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| cfg.bundle_dir());
    let dataset = load_bundle(&input)?;
    let filtered = preprocess_dataset(&dataset, &cfg.preprocess)?;
    let dir = cfg.preprocessed_dir();
    save_bundle(&filtered, &dir, cfg.synth.encoding)?;
    cfg.write_sidecar(&dir)?;
    Ok(dir)
}

/// Extract the configured feature sets from a preprocessed bundle into a
/// feature store.
pub fn run_features(cfg: &RunConfig, input: Option<&Path>) -> Result<PathBuf> {
    let input = input.map(Path::to_path_buf).unwrap_or_else(|| cfg.preprocessed_dir());
    let dataset = load_bundle(&input)?;
    let opts = ExtractOptions { epsilon: cfg.features.zc_ssc_epsilon, ..Default::default() };
    let matrices: Vec<FeatureMatrix> = cfg
        .features
        .kinds
        .iter()
        .map(|&kind| extract_dataset(&dataset, kind, &cfg.window, &opts))
        .collect::<Result<_>>()?;
    let meta = StoreMeta {
        dataset_name: dataset.name.clone(),
        subjects: dataset.subject_ids(),
        kinds: cfg.features.kinds.clone(),
        window: cfg.window,
        preprocess: cfg.preprocess,
        zc_ssc_epsilon: cfg.features.zc_ssc_epsilon,
        tdpsd_version: crate::features::TDPSD_DEFINITION_VERSION.into(),
        gesture_names: dataset.gesture_names.clone(),
        position_names: dataset.position_names.clone(),
    };
    let dir = cfg.features_dir();
    write_store(&dir, &matrices, &meta)?;
    cfg.write_sidecar(&dir)?;
    Ok(dir)
}

/// Evaluation request: which task over which feature sets.
#[derive(Debug, Clone)]
pub struct EvalRequest {
    pub task: TaskKind,
    /// Stage-one features (sequential task).
    pub position_features: FeatureSetKind,
    /// Features classified by the (final) stage.
    pub feature_set: FeatureSetKind,
    pub subset: Option<PathBuf>,
    /// Route the sequential task with ground-truth positions.
    pub oracle_positions: bool,
}

impl EvalRequest {
    pub fn from_config(cfg: &RunConfig, task: TaskKind) -> Self {
        Self {
            task,
            position_features: cfg.eval.position_features,
            feature_set: match task {
                TaskKind::Position => cfg.eval.position_features,
                _ => cfg.eval.gesture_features,
            },
            subset: None,
            oracle_positions: false,
        }
    }
}

fn retain_subset(matrix: FeatureMatrix, subset: &GestureSubset) -> Result<FeatureMatrix> {
    let present: BTreeSet<u32> = matrix.rows.iter().map(|r| r.labels.gesture).collect();
    for id in &subset.gesture_ids {
        if !present.contains(id) {
            return Err(Error::Task(format!(
                "gesture subset '{}' references gesture id {id} absent from the feature store",
                subset.name
            )));
        }
    }
    let rows =
        matrix.rows.into_iter().filter(|r| subset.gesture_ids.contains(&r.labels.gesture)).collect();
    Ok(FeatureMatrix { kind: matrix.kind, columns: matrix.columns, rows })
}

/// Run one evaluation task against a feature store and write result JSON
/// plus the confusion-matrix CSV. Returns the written JSON path.
pub fn run_eval(cfg: &RunConfig, store: Option<&Path>, request: &EvalRequest) -> Result<PathBuf> {
    let store_dir = store.map(Path::to_path_buf).unwrap_or_else(|| cfg.features_dir());
    let meta = read_meta(&store_dir)?;
    let subset = match &request.subset {
        Some(path) => Some(GestureSubset::from_json_file(path)?),
        None => None,
    };
    let load = |kind: FeatureSetKind| -> Result<FeatureMatrix> {
        let matrix = read_matrix(&store_dir, kind)?;
        match &subset {
            Some(s) => retain_subset(matrix, s),
            None => Ok(matrix),
        }
    };

    let opts = TaskOptions {
        classifier: cfg.classifier_kind()?,
        seed: cfg.seed,
        exclude_gestures: cfg.eval.exclude_gestures.iter().copied().collect(),
        ridge_gamma: cfg.eval.ridge_gamma,
        record_predictions: cfg.eval.record_predictions,
        gesture_names: meta.gesture_names.clone(),
        position_names: meta.position_names.clone(),
    };

    let result: TaskResult = match request.task {
        TaskKind::Position => run_position_task(&load(request.feature_set)?, &opts)?,
        TaskKind::Gesture => run_within_position_task(&load(request.feature_set)?, &opts)?,
        TaskKind::Sequential => {
            let routing = if request.oracle_positions {
                PositionRouting::Oracle
            } else {
                PositionRouting::Predicted
            };
            run_sequential_task(
                &load(request.position_features)?,
                &load(request.feature_set)?,
                &opts,
                routing,
            )?
        }
    };

    let results_dir = cfg.results_dir();
    fs::create_dir_all(&results_dir)?;
    let stem = match request.task {
        TaskKind::Sequential => format!(
            "sequential_{}_{}_{}_s{}",
            request.position_features, request.feature_set, opts.classifier, cfg.seed
        ),
        task => format!("{task}_{}_{}_s{}", request.feature_set, opts.classifier, cfg.seed),
    };
    let file = ResultFile {
        dataset: meta.dataset_name,
        tdpsd_version: meta.tdpsd_version,
        run_config: cfg.clone(),
        result,
    };
    let json_path = results_dir.join(format!("{stem}.json"));
    fs::write(&json_path, serde_json::to_string_pretty(&file)? + "\n")?;
    fs::write(
        results_dir.join(format!("{stem}_confusion.csv")),
        report::confusion_csv(&file.result),
    )?;
    Ok(json_path)
}

/// Collect result JSONs from a directory (sorted by file name for a
/// deterministic report).
pub fn load_results(dir: &Path) -> Result<Vec<ResultFile>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Config(format!("cannot read results dir {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "json")
                && p.file_name().is_some_and(|n| n != "run_config.json")
        })
        .collect();
    paths.sort();
    let mut results = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path)?;
        let parsed: ResultFile = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        results.push(parsed);
    }
    if results.is_empty() {
        return Err(Error::Config(format!("no result JSON files in {}", dir.display())));
    }
    Ok(results)
}

/// Render the Markdown report (and optionally plot-data CSV and the
/// reference comparison) from result JSONs. Returns the report path.
pub fn run_report(
    cfg: &RunConfig,
    results_dir: Option<&Path>,
    output: Option<&Path>,
    csv: bool,
    reference: Option<&str>,
) -> Result<PathBuf> {
    let dir = results_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.results_dir());
    let results = load_results(&dir)?;
    let mut markdown = report::render_markdown(&results);
    if let Some(tag) = reference {
        markdown.push_str(&report::render_reference_comparison(&results, tag)?);
    }
    let out_path =
        output.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.join("report.md"));
    if let Some(parent) = out_path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&out_path, &markdown)?;
    if csv {
        let csv_path = out_path.with_extension("csv");
        fs::write(&csv_path, report::plot_data_csv(&results))?;
    }
    Ok(out_path)
}
