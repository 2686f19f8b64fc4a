//! Within-position gesture recognition on both presets: EMG dominates when
//! gestures are position-invariant, ACC dominates when gestures carry
//! deliberate positional variance.

use myobench::eval::{run_within_position_task, TaskOptions};
use myobench::features::{extract_dataset, ExtractOptions, FeatureSetKind};
use myobench::preprocess::{preprocess_dataset, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::WindowSpec;

fn main() -> myobench::Result<()> {
    for name in ["bio-like", "hci-like"] {
        let config = preset(name)?.with_scale(0.25)?.with_seed(7);
        let dataset = generate(&config)?;
        let filtered = preprocess_dataset(&dataset, &PreprocessConfig::default())?;
        let opts = TaskOptions {
            seed: 7,
            gesture_names: dataset.gesture_names.clone(),
            ..Default::default()
        };
        println!(
            "\n{name} (coupling {}): gesture accuracy with LDA",
            config.positional_coupling
        );
        let mut cells = Vec::new();
        for kind in [FeatureSetKind::AccMed, FeatureSetKind::EmgTd] {
            let matrix = extract_dataset(
                &filtered,
                kind,
                &WindowSpec::default(),
                &ExtractOptions::default(),
            )?;
            let result = run_within_position_task(&matrix, &opts)?;
            println!("  {kind:<9} {:.1}+{:.1} %", 100.0 * result.mean, 100.0 * result.std_dev);
            cells.push(result.mean);
        }
        let winner = if cells[0] > cells[1] { "ACC" } else { "EMG" };
        println!("  -> {winner} wins by {:.1} points", 100.0 * (cells[0] - cells[1]).abs());
    }
    Ok(())
}
