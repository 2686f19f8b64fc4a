//! The positional-coupling knob: sweeping it from 0 to 1 turns the
//! accelerometers from gesture-blind into the best gesture sensor, without
//! touching the EMG model. This isolates positional variance as the source
//! of inertial gesture separability.

use myobench::eval::{run_within_position_task, TaskOptions};
use myobench::features::{extract_dataset, ExtractOptions, FeatureSetKind};
use myobench::preprocess::{preprocess_dataset, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::WindowSpec;

fn main() -> myobench::Result<()> {
    println!("bio-like preset (scale 0.25), ACC MED gesture accuracy with LDA:\n");
    println!("{:>9} {:>12} {:>12}", "coupling", "ACC MED", "EMG TD");
    for coupling in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mut config = preset("bio-like")?.with_scale(0.25)?.with_seed(7);
        config.positional_coupling = coupling;
        let dataset = generate(&config)?;
        let filtered = preprocess_dataset(&dataset, &PreprocessConfig::default())?;
        let opts = TaskOptions { seed: 7, ..Default::default() };
        let mut row = Vec::new();
        for kind in [FeatureSetKind::AccMed, FeatureSetKind::EmgTd] {
            let matrix = extract_dataset(
                &filtered,
                kind,
                &WindowSpec::default(),
                &ExtractOptions::default(),
            )?;
            row.push(run_within_position_task(&matrix, &opts)?.mean);
        }
        println!(
            "{coupling:>9.2} {:>11.1}% {:>11.1}%",
            100.0 * row[0],
            100.0 * row[1]
        );
    }
    println!(
        "\nEMG stays flat because its gesture information comes from per-channel\n\
         amplitude profiles; ACC climbs because the coupling injects gesture-\n\
         specific orientation trajectories."
    );
    Ok(())
}
