//! Sequential two-stage classification: an ACC MED position classifier
//! routes each window to a position-specific EMG TD gesture classifier.
//! Routing with ground-truth positions reproduces the within-position
//! result exactly, which bounds what the two-stage scheme can achieve.

use myobench::eval::{
    run_sequential_task, run_within_position_task, PositionRouting, TaskOptions,
};
use myobench::features::{extract_dataset, ExtractOptions, FeatureSetKind};
use myobench::preprocess::{preprocess_dataset, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::WindowSpec;

fn main() -> myobench::Result<()> {
    let config = preset("bio-like")?.with_scale(0.25)?.with_seed(7);
    let dataset = generate(&config)?;
    let filtered = preprocess_dataset(&dataset, &PreprocessConfig::default())?;
    let spec = WindowSpec::default();
    let extract_opts = ExtractOptions::default();

    let position_features =
        extract_dataset(&filtered, FeatureSetKind::AccMed, &spec, &extract_opts)?;
    let gesture_features =
        extract_dataset(&filtered, FeatureSetKind::EmgTd, &spec, &extract_opts)?;

    let opts = TaskOptions {
        seed: 7,
        gesture_names: dataset.gesture_names.clone(),
        position_names: dataset.position_names.clone(),
        ..Default::default()
    };

    let within = run_within_position_task(&gesture_features, &opts)?;
    println!(
        "within-position (upper bound): {:.2}+{:.2} %",
        100.0 * within.mean,
        100.0 * within.std_dev
    );

    let predicted = run_sequential_task(
        &position_features,
        &gesture_features,
        &opts,
        PositionRouting::Predicted,
    )?;
    println!(
        "sequential, predicted routing:  {:.2}+{:.2} %  (fallback dispatches: {})",
        100.0 * predicted.mean,
        100.0 * predicted.std_dev,
        predicted.dispatch_fallbacks
    );

    let oracle = run_sequential_task(
        &position_features,
        &gesture_features,
        &opts,
        PositionRouting::Oracle,
    )?;
    println!(
        "sequential, oracle routing:     {:.2}+{:.2} %",
        100.0 * oracle.mean,
        100.0 * oracle.std_dev
    );
    println!(
        "\noracle routing reproduces the within-position accuracies exactly: {}",
        oracle.subjects == within.subjects
    );
    println!(
        "predicted routing costs {:.2} points versus the upper bound",
        100.0 * (within.mean - predicted.mean)
    );
    Ok(())
}
