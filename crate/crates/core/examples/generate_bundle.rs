//! Bundle round trip: generate a synthetic dataset, save it as a canonical
//! bundle, reload it, validate, and carve a gesture subset.

use std::collections::BTreeSet;

use myobench::bundle::{load_bundle, save_bundle, BundleEncoding};
use myobench::dataset::GestureSubset;
use myobench::synth::{generate, preset};

fn main() -> myobench::Result<()> {
    let config = preset("bio-like")?.with_scale(0.05)?.with_seed(9);
    let dataset = generate(&config)?;
    println!(
        "generated '{}': {} trials, {} gestures, {} positions",
        dataset.name,
        dataset.trials.len(),
        dataset.gesture_names.len(),
        dataset.position_names.len()
    );

    let dir = std::env::temp_dir().join("myobench_bundle_example");
    let _ = std::fs::remove_dir_all(&dir);
    save_bundle(&dataset, &dir, BundleEncoding::Csv)?;
    println!("saved -> {}", dir.display());

    let loaded = load_bundle(&dir)?;
    println!("reloaded: identical = {}", loaded == dataset);
    println!("violations: {:?}", loaded.validate());

    // Wrist-only gesture subset (ids 1-4 are the wrist gestures in the
    // bio-like preset).
    let subset = GestureSubset {
        name: "wrist-only".into(),
        gesture_ids: BTreeSet::from([1, 2, 3, 4]),
    };
    let wrist = loaded.filter_subset(&subset)?;
    println!(
        "subset '{}': {} trials, gestures {:?}",
        subset.name,
        wrist.trials.len(),
        wrist.gesture_names.values().collect::<Vec<_>>()
    );

    // The f32le encoding trades bit-exactness for size.
    let dir32 = std::env::temp_dir().join("myobench_bundle_example_f32");
    let _ = std::fs::remove_dir_all(&dir32);
    save_bundle(&dataset, &dir32, BundleEncoding::F32le)?;
    let loaded32 = load_bundle(&dir32)?;
    println!(
        "f32le reload: {} trials, exact = {}",
        loaded32.trials.len(),
        loaded32 == dataset
    );
    Ok(())
}
