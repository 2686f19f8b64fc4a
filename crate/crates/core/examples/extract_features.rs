//! Feature extraction: all four feature sets from one preprocessed
//! synthetic trial, with the dimension law and column naming on display.

use myobench::features::{extract, ExtractOptions, FeatureSetKind};
use myobench::preprocess::{preprocess_trial, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::{segment_stream, WindowSpec};

fn main() -> myobench::Result<()> {
    let mut config = preset("bio-like")?.with_scale(0.01)?.with_seed(3);
    config.subjects = 1;
    config.repetitions = 1;
    let dataset = generate(&config)?;
    // First non-rest trial.
    let trial = dataset.trials.iter().find(|t| t.gesture != 0).unwrap();
    let trial = preprocess_trial(trial, &PreprocessConfig::default())?;

    let spec = WindowSpec::default();
    let opts = ExtractOptions::default();
    for kind in FeatureSetKind::ALL {
        let stream = trial.stream(kind.modality())?;
        let windows = segment_stream(stream, &spec, trial.key())?;
        let matrix = extract(&windows, kind, &opts)?;
        println!(
            "{kind}: {} windows x {} features ({} channels x {} per channel)",
            matrix.rows.len(),
            matrix.dim(),
            stream.channel_count(),
            kind.per_channel_dim(),
        );
        println!("  columns: {} ... {}", matrix.columns[0], matrix.columns.last().unwrap());
        let row = &matrix.rows[0];
        let preview: Vec<String> =
            row.values.iter().take(6).map(|v| format!("{v:.4}")).collect();
        println!(
            "  row 0 (gesture {}, window {} @ {:.1} s): [{} ...]\n",
            row.labels.gesture,
            row.labels.window_index,
            row.labels.start_time_s,
            preview.join(", ")
        );
    }

    // Modality affinity is enforced.
    let acc = trial.stream(myobench::dataset::Modality::Acc)?;
    let acc_windows = segment_stream(acc, &spec, trial.key())?;
    let err = extract(&acc_windows, FeatureSetKind::EmgTd, &opts).unwrap_err();
    println!("extracting emg-td from acc windows: {err}");
    Ok(())
}
