//! Multi-gesture position recognition: accelerometers decode limb position
//! nearly perfectly, EMG only weakly.

use myobench::eval::{run_position_task, TaskOptions};
use myobench::features::{extract_dataset, ExtractOptions, FeatureSetKind};
use myobench::preprocess::{preprocess_dataset, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::WindowSpec;

fn main() -> myobench::Result<()> {
    let config = preset("bio-like")?.with_scale(0.25)?.with_seed(7);
    println!(
        "bio-like preset at scale 0.25: {} subjects, {} repetitions, 5 positions",
        config.subjects, config.repetitions
    );
    let dataset = generate(&config)?;
    let filtered = preprocess_dataset(&dataset, &PreprocessConfig::default())?;

    let opts = TaskOptions {
        seed: 7,
        position_names: dataset.position_names.clone(),
        ..Default::default()
    };
    for kind in [FeatureSetKind::AccMed, FeatureSetKind::AccRms, FeatureSetKind::EmgTd] {
        let matrix =
            extract_dataset(&filtered, kind, &WindowSpec::default(), &ExtractOptions::default())?;
        let result = run_position_task(&matrix, &opts)?;
        println!(
            "\n{kind} + LDA: {:.1}+{:.1} %",
            100.0 * result.mean,
            100.0 * result.std_dev
        );
        if kind == FeatureSetKind::AccMed {
            println!("confusion (row-normalized %):");
            let pct = result.confusion.row_normalized_percent();
            for (name, row) in result.confusion.class_names.iter().zip(&pct) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:5.1}")).collect();
                println!("  {name}: {}", cells.join(" "));
            }
        }
    }

    println!("\n(the hci-like preset has no position labels; the task reports 'unavailable')");
    Ok(())
}
