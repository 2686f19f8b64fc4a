//! k-nearest-neighbour classifier over standardized features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stored training data (already standardized) plus `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    k: usize,
    train: Vec<Vec<f64>>,
    /// Class indices (into the model's sorted class list), one per row.
    labels: Vec<usize>,
}

pub(super) fn fit(k: usize, train: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<KnnModel> {
    if k > train.len() {
        return Err(Error::Fit(format!(
            "knn k={k} exceeds the {} training rows",
            train.len()
        )));
    }
    Ok(KnnModel { k, train, labels })
}

impl KnnModel {
    /// Majority label among the k nearest rows by Euclidean distance.
    ///
    /// Equidistant rows order by row index, vote ties break toward the
    /// lowest class index.
    pub fn predict(&self, z: &[f64]) -> usize {
        let mut distances: Vec<(f64, usize)> = self
            .train
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d2: f64 =
                    row.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let n_classes = self.labels.iter().copied().max().unwrap_or(0) + 1;
        let mut votes = vec![0usize; n_classes];
        for &(_, idx) in distances.iter().take(self.k) {
            votes[self.labels[idx]] += 1;
        }
        super::argmax_lowest(&votes.iter().map(|&v| v as f64).collect::<Vec<_>>())
    }
}
