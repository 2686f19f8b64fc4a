//! The four classifier families on a 3-class Gaussian-blob problem, plus
//! the determinism and serialization guarantees.

use myobench::classify::{fit, ClassifierKind, FitOptions, TrainedModel};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn blobs(n_per_class: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<u32>) {
    let centers = [[0.0, 0.0], [separation, 0.0], [0.0, separation]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            rows.push(vec![
                center[0] + rng.sample::<f64, _>(StandardNormal),
                center[1] + rng.sample::<f64, _>(StandardNormal),
            ]);
            labels.push(class as u32 + 1);
        }
    }
    (rows, labels)
}

fn as_refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
    rows.iter().map(Vec::as_slice).collect()
}

fn accuracy(model: &TrainedModel, rows: &[Vec<f64>], labels: &[u32]) -> f64 {
    let preds = model.predict_batch(&as_refs(rows)).unwrap();
    preds.iter().zip(labels).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64
}

fn main() -> myobench::Result<()> {
    let (train_rows, train_labels) = blobs(500, 6.0, 1);
    let (test_rows, test_labels) = blobs(500, 6.0, 2);

    println!("3-class spherical blobs, 6 sigma separation, 500 train / 500 test per class\n");
    for kind in [
        ClassifierKind::Lda,
        ClassifierKind::Qda,
        ClassifierKind::knn_default(),
        ClassifierKind::forest_default(),
    ] {
        let opts = FitOptions { seed: 42, ..Default::default() };
        let model = fit(kind, &as_refs(&train_rows), &train_labels, &opts)?;
        let acc = accuracy(&model, &test_rows, &test_labels);
        println!("{:>5}: test accuracy {:.4}", kind.short_label(), acc);
    }

    // Random forests are bit-deterministic in (data, seed).
    let opts = FitOptions { seed: 42, ..Default::default() };
    let a = fit(ClassifierKind::forest_default(), &as_refs(&train_rows), &train_labels, &opts)?;
    let b = fit(ClassifierKind::forest_default(), &as_refs(&train_rows), &train_labels, &opts)?;
    println!("\nsame-seed forests identical: {}", a == b);

    // Serialization round-trips preserve predictions exactly.
    let restored = TrainedModel::from_json(&a.to_json()?)?;
    let same = test_rows
        .iter()
        .all(|r| a.predict(r).unwrap() == restored.predict(r).unwrap());
    println!("round-tripped forest predicts identically: {same}");

    // Discriminant values are exposed for the Gaussian families.
    let lda = fit(ClassifierKind::Lda, &as_refs(&train_rows), &train_labels, &opts)?;
    let scores = lda.gaussian_discriminants(&[3.0, 3.0])?;
    println!("\nLDA discriminants at (3, 3): {scores:.3?}");
    Ok(())
}
