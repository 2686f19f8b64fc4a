//! Paired significance testing: does MED encode position better than RMS?
//! Wilcoxon signed-rank over per-subject mean accuracies.

use myobench::eval::{compare_paired, run_position_task, TaskOptions};
use myobench::features::{extract_dataset, ExtractOptions, FeatureSetKind};
use myobench::preprocess::{preprocess_dataset, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::WindowSpec;

fn main() -> myobench::Result<()> {
    // The paired test needs at least 6 subjects; scale 0.5 keeps 6 of 12.
    let config = preset("bio-like")?.with_scale(0.5)?.with_seed(7);
    println!(
        "bio-like at scale 0.5: {} subjects, {} repetitions",
        config.subjects, config.repetitions
    );
    let dataset = generate(&config)?;
    let filtered = preprocess_dataset(&dataset, &PreprocessConfig::default())?;
    let opts = TaskOptions { seed: 7, ..Default::default() };

    let mut per_subject = Vec::new();
    for kind in [FeatureSetKind::AccMed, FeatureSetKind::AccRms] {
        let matrix =
            extract_dataset(&filtered, kind, &WindowSpec::default(), &ExtractOptions::default())?;
        let result = run_position_task(&matrix, &opts)?;
        println!(
            "{kind} position accuracy: {:.1}+{:.1} %",
            100.0 * result.mean,
            100.0 * result.std_dev
        );
        per_subject.push(result.per_subject_means());
    }

    let cmp = compare_paired(&per_subject[0], &per_subject[1])?;
    println!("\nWilcoxon signed-rank (two-sided, {}):", cmp.method);
    println!("  n effective = {}", cmp.n_effective);
    println!("  W = {}", cmp.statistic);
    println!("  p = {:.5}", cmp.p_value);
    println!("  significant at 0.05: {}", cmp.significant);
    Ok(())
}
