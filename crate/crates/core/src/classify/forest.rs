//! Random forest grown from bootstrap resamples with Gini splits.
//!
//! Trees grow to purity (minimum leaf size 1) on `ceil(sqrt(d))` candidate
//! features per split, with thresholds at midpoints between consecutive
//! distinct sorted values. All randomness comes from a counter-based
//! generator: tree `t` uses stream `t` of a ChaCha generator seeded with
//! the fit seed, so the fitted forest is bit-identical for a given
//! (data, seed) at any thread count.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        /// Training-sample counts per class index.
        histogram: Vec<u32>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, z: &[f64]) -> usize {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { histogram } => {
                    return crate::classify::argmax_lowest(
                        &histogram.iter().map(|&c| c as f64).collect::<Vec<_>>(),
                    );
                }
                Node::Split { feature, threshold, left, right } => {
                    at = if z[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<Tree>,
    n_classes: usize,
}

pub(super) fn fit(
    n_trees: usize,
    rows: &[Vec<f64>],
    class_indices: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<ForestModel> {
    let trees: Vec<Tree> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            grow_tree(rows, class_indices, n_classes, &mut rng)
        })
        .collect();
    Ok(ForestModel { trees, n_classes })
}

fn grow_tree(
    rows: &[Vec<f64>],
    class_indices: &[usize],
    n_classes: usize,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let n = rows.len();
    let dim = rows[0].len();
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let m_try = (dim as f64).sqrt().ceil() as usize;

    let mut nodes = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();

    nodes.push(Node::Leaf { histogram: vec![0; n_classes] }); // placeholder root
    stack.push((0, bootstrap));

    while let Some((node_id, indices)) = stack.pop() {
        let mut histogram = vec![0u32; n_classes];
        for &i in &indices {
            histogram[class_indices[i]] += 1;
        }
        let pure = histogram.iter().filter(|&&c| c > 0).count() <= 1;

        let split = if pure { None } else { best_split(rows, class_indices, &indices, dim, m_try, n_classes, rng) };
        match split {
            None => nodes[node_id] = Node::Leaf { histogram },
            Some((feature, threshold)) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
                    indices.iter().partition(|&&i| rows[i][feature] <= threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { histogram: vec![0; n_classes] });
                let right = nodes.len();
                nodes.push(Node::Leaf { histogram: vec![0; n_classes] });
                nodes[node_id] = Node::Split { feature, threshold, left, right };
                // Push right first so the left child is processed (and laid
                // out) first; layout is part of the determinism contract.
                stack.push((right, right_idx));
                stack.push((left, left_idx));
            }
        }
    }
    Tree { nodes }
}

/// Best (feature, threshold) among `m_try` sampled candidate features by
/// Gini impurity decrease; `None` when no candidate offers a positive
/// decrease (for example all candidates constant).
fn best_split(
    rows: &[Vec<f64>],
    class_indices: &[usize],
    indices: &[usize],
    dim: usize,
    m_try: usize,
    n_classes: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, f64)> {
    let candidates = rand::seq::index::sample(rng, dim, m_try.min(dim));
    let total = indices.len() as f64;

    let mut parent_counts = vec![0.0f64; n_classes];
    for &i in indices {
        parent_counts[class_indices[i]] += 1.0;
    }
    let gini = |counts: &[f64], n: f64| -> f64 {
        if n == 0.0 {
            return 0.0;
        }
        1.0 - counts.iter().map(|c| (c / n) * (c / n)).sum::<f64>()
    };
    let parent_gini = gini(&parent_counts, total);

    let mut best: Option<(f64, usize, f64)> = None; // (decrease, feature, threshold)
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(indices.len());
    for feature in candidates.iter() {
        sorted.clear();
        sorted.extend(indices.iter().map(|&i| (rows[i][feature], class_indices[i])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_counts = vec![0.0f64; n_classes];
        let mut right_counts = parent_counts.clone();
        for w in 0..sorted.len() - 1 {
            left_counts[sorted[w].1] += 1.0;
            right_counts[sorted[w].1] -= 1.0;
            if sorted[w].0 == sorted[w + 1].0 {
                continue; // no boundary between equal values
            }
            let threshold = (sorted[w].0 + sorted[w + 1].0) / 2.0;
            let n_left = (w + 1) as f64;
            let n_right = total - n_left;
            let weighted = (n_left * gini(&left_counts, n_left)
                + n_right * gini(&right_counts, n_right))
                / total;
            let decrease = parent_gini - weighted;
            if decrease > 0.0 && best.map_or(true, |(b, _, _)| decrease > b) {
                best = Some((decrease, feature, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

impl ForestModel {
    /// Majority vote over tree predictions, ties toward the lowest class.
    pub fn predict(&self, z: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(z)] += 1;
        }
        crate::classify::argmax_lowest(&votes.iter().map(|&v| v as f64).collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use crate::classify::{fit as fit_model, ClassifierKind, FitOptions};

    fn as_refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
        rows.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn refitting_with_same_seed_is_node_identical() {
        let (rows, labels) = crate::classify::tests::blobs(60, 3, 3.0, 21);
        let opts = FitOptions { seed: 42, ..Default::default() };
        let a = fit_model(ClassifierKind::RandomForest { trees: 10 }, &as_refs(&rows), &labels, &opts)
            .unwrap();
        let b = fit_model(ClassifierKind::RandomForest { trees: 10 }, &as_refs(&rows), &labels, &opts)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let (rows, labels) = crate::classify::tests::blobs(60, 3, 3.0, 21);
        let a = fit_model(
            ClassifierKind::RandomForest { trees: 10 },
            &as_refs(&rows),
            &labels,
            &FitOptions { seed: 1, ..Default::default() },
        )
        .unwrap();
        let b = fit_model(
            ClassifierKind::RandomForest { trees: 10 },
            &as_refs(&rows),
            &labels,
            &FitOptions { seed: 2, ..Default::default() },
        )
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn forest_fits_xor_pattern() {
        // Not linearly separable; trees should still carve it exactly.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..200 {
            let x = (i % 2) as f64;
            let y = ((i / 2) % 2) as f64;
            let jitter = (i as f64 * 0.001).sin() * 0.05;
            rows.push(vec![x + jitter, y - jitter]);
            labels.push(((x as i32) ^ (y as i32)) as u32);
        }
        let m = fit_model(
            ClassifierKind::RandomForest { trees: 20 },
            &as_refs(&rows),
            &labels,
            &FitOptions { seed: 3, ..Default::default() },
        )
        .unwrap();
        let preds = m.predict_batch(&as_refs(&rows)).unwrap();
        let acc = preds.iter().zip(&labels).filter(|(a, b)| a == b).count() as f64
            / labels.len() as f64;
        assert!(acc > 0.99, "xor accuracy {acc}");
    }
}
