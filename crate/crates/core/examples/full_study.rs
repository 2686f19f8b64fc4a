//! End-to-end synthetic study: generates both preset datasets, runs the
//! three classification tasks, and prints accuracy tables plus the paired
//! significance test comparing the two ACC feature sets.
//!
//! Run with: `cargo run --release --example full_study`

use std::collections::BTreeMap;
use std::time::Instant;

use myobench::classify::ClassifierKind;
use myobench::dataset::Dataset;
use myobench::eval::{
    compare_paired, run_position_task, run_sequential_task, run_within_position_task,
    PositionRouting, TaskOptions, TaskResult,
};
use myobench::features::{extract_dataset, ExtractOptions, FeatureMatrix, FeatureSetKind};
use myobench::preprocess::{preprocess_dataset, PreprocessConfig};
use myobench::synth::{generate, preset};
use myobench::window::WindowSpec;

const SEED: u64 = 7;
const SCALE: f64 = 0.25;

fn cell(r: &TaskResult) -> String {
    format!("{:.1}+{:.1}", 100.0 * r.mean, 100.0 * r.std_dev)
}

struct Study {
    features: BTreeMap<FeatureSetKind, FeatureMatrix>,
    opts_base: TaskOptions,
}

impl Study {
    fn prepare(dataset: &Dataset) -> myobench::Result<Self> {
        let filtered = preprocess_dataset(dataset, &PreprocessConfig::default())?;
        let mut features = BTreeMap::new();
        for kind in FeatureSetKind::ALL {
            features.insert(
                kind,
                extract_dataset(&filtered, kind, &WindowSpec::default(), &ExtractOptions::default())?,
            );
        }
        let opts_base = TaskOptions {
            seed: SEED,
            gesture_names: dataset.gesture_names.clone(),
            position_names: dataset.position_names.clone(),
            ..Default::default()
        };
        Ok(Study { features, opts_base })
    }

    fn opts(&self, classifier: ClassifierKind) -> TaskOptions {
        TaskOptions { classifier, ..self.opts_base.clone() }
    }
}

fn main() -> myobench::Result<()> {
    let start = Instant::now();
    let classifiers = [
        ClassifierKind::Lda,
        ClassifierKind::Qda,
        ClassifierKind::knn_default(),
        ClassifierKind::forest_default(),
    ];
    let feature_sets = [
        FeatureSetKind::AccMed,
        FeatureSetKind::AccRms,
        FeatureSetKind::EmgTd,
        FeatureSetKind::EmgTdpsd,
    ];

    println!("generating bio-like preset (scale {SCALE}, seed {SEED})...");
    let bio_config = preset("bio-like")?.with_scale(SCALE)?.with_seed(SEED);
    let bio = generate(&bio_config)?;
    let bio_study = Study::prepare(&bio)?;

    println!("generating hci-like preset (scale {SCALE}, seed {SEED})...");
    let hci_config = preset("hci-like")?.with_scale(SCALE)?.with_seed(SEED);
    let hci = generate(&hci_config)?;
    let hci_study = Study::prepare(&hci)?;

    // --- position recognition (bio only; the hci preset has no labels) ---
    println!("\n== multi-gesture position recognition (bio-like) ==");
    println!("{:<6} {:>12} {:>12} {:>12} {:>12}", "clf", "MED", "RMS", "TD", "TDPSD");
    let mut med_subject_means = Vec::new();
    let mut rms_subject_means = Vec::new();
    for clf in classifiers {
        let mut cells = Vec::new();
        for fs in feature_sets {
            let r = run_position_task(&bio_study.features[&fs], &bio_study.opts(clf))?;
            if clf == ClassifierKind::Lda {
                if fs == FeatureSetKind::AccMed {
                    med_subject_means = r.per_subject_means();
                }
                if fs == FeatureSetKind::AccRms {
                    rms_subject_means = r.per_subject_means();
                }
            }
            cells.push(cell(&r));
        }
        println!(
            "{:<6} {:>12} {:>12} {:>12} {:>12}",
            clf.short_label(),
            cells[0],
            cells[1],
            cells[2],
            cells[3]
        );
    }

    // --- within-position gesture recognition ---
    for (label, study) in [("bio-like", &bio_study), ("hci-like", &hci_study)] {
        println!("\n== within-position gesture recognition ({label}) ==");
        println!("{:<6} {:>12} {:>12} {:>12} {:>12}", "clf", "MED", "RMS", "TD", "TDPSD");
        for clf in classifiers {
            let cells: Vec<String> = feature_sets
                .iter()
                .map(|fs| {
                    run_within_position_task(&study.features[fs], &study.opts(clf)).map(|r| cell(&r))
                })
                .collect::<myobench::Result<_>>()?;
            println!(
                "{:<6} {:>12} {:>12} {:>12} {:>12}",
                clf.short_label(),
                cells[0],
                cells[1],
                cells[2],
                cells[3]
            );
        }
    }

    // --- sequential two-stage classification (bio only) ---
    println!("\n== sequential classification, ACC MED position stage (bio-like) ==");
    println!("{:<10} {:>12} {:>12} {:>12} {:>12}", "gesture", "LDA", "QDA", "kNN", "RF");
    for gesture_fs in feature_sets {
        let cells: Vec<String> = classifiers
            .iter()
            .map(|&clf| {
                run_sequential_task(
                    &bio_study.features[&FeatureSetKind::AccMed],
                    &bio_study.features[&gesture_fs],
                    &bio_study.opts(clf),
                    PositionRouting::Predicted,
                )
                .map(|r| cell(&r))
            })
            .collect::<myobench::Result<_>>()?;
        println!(
            "{:<10} {:>12} {:>12} {:>12} {:>12}",
            gesture_fs.short_label(),
            cells[0],
            cells[1],
            cells[2],
            cells[3]
        );
    }

    // --- oracle-routing identity check ---
    let within = run_within_position_task(
        &bio_study.features[&FeatureSetKind::EmgTd],
        &bio_study.opts(ClassifierKind::Lda),
    )?;
    let oracle = run_sequential_task(
        &bio_study.features[&FeatureSetKind::AccMed],
        &bio_study.features[&FeatureSetKind::EmgTd],
        &bio_study.opts(ClassifierKind::Lda),
        PositionRouting::Oracle,
    )?;
    println!(
        "\noracle-routed sequential equals within-position exactly: {}",
        within.subjects == oracle.subjects
    );

    // --- MED vs RMS significance on the position task ---
    if med_subject_means.len() >= 6 {
        let cmp = compare_paired(&med_subject_means, &rms_subject_means)?;
        println!(
            "MED vs RMS position accuracy: W={}, p={:.4}, significant={} ({})",
            cmp.statistic, cmp.p_value, cmp.significant, cmp.method
        );
    } else {
        println!(
            "MED vs RMS significance skipped: {} subjects at this scale (need >= 6); \
             rerun with a larger --scale",
            med_subject_means.len()
        );
    }

    println!("\ntotal runtime: {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
