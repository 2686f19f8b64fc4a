//! Row-normalized confusion matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts over a fixed class list, true label by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<u32>,
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<u32>, class_names: Vec<String>) -> Self {
        let n = classes.len();
        Self { classes, class_names, counts: vec![vec![0; n]; n] }
    }

    fn class_index(&self, label: u32) -> Result<usize> {
        self.classes
            .binary_search(&label)
            .map_err(|_| Error::Task(format!("label {label} outside the class list")))
    }

    pub fn record(&mut self, truth: u32, predicted: u32) -> Result<()> {
        let t = self.class_index(truth)?;
        let p = self.class_index(predicted)?;
        self.counts[t][p] += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        debug_assert_eq!(self.classes, other.classes);
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    /// Entry (i, j) = 100 * count(true = i, pred = j) / count(true = i);
    /// rows with no observations are all-zero (see [`Self::empty_rows`]).
    pub fn row_normalized_percent(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                if total == 0 {
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|&c| 100.0 * c as f64 / total as f64).collect()
                }
            })
            .collect()
    }

    /// Classes whose true-label row has no observations.
    pub fn empty_rows(&self) -> Vec<u32> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.row_total(*i) == 0)
            .map(|(_, &c)| c)
            .collect()
    }

    /// Overall accuracy: diagonal count over total count.
    pub fn accuracy(&self) -> f64 {
        let correct: u64 = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        let total: u64 = self.counts.iter().flatten().sum();
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

/// Build a confusion matrix from parallel label sequences.
pub fn confusion_matrix(
    truths: &[u32],
    predictions: &[u32],
    classes: &[u32],
    class_names: &[String],
) -> Result<ConfusionMatrix> {
    if truths.len() != predictions.len() {
        return Err(Error::Task(format!(
            "{} truths vs {} predictions",
            truths.len(),
            predictions.len()
        )));
    }
    let mut m = ConfusionMatrix::new(classes.to_vec(), class_names.to_vec());
    for (&t, &p) in truths.iter().zip(predictions) {
        m.record(t, p)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(classes: &[u32]) -> Vec<String> {
        classes.iter().map(|c| format!("C{c}")).collect()
    }

    #[test]
    fn perfect_predictions_give_identity_times_100() {
        let classes = [1u32, 2, 3];
        let truths = [1u32, 2, 3, 1, 2, 3];
        let m = confusion_matrix(&truths, &truths, &classes, &names(&classes)).unwrap();
        let pct = m.row_normalized_percent();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(pct[i][j], if i == j { 100.0 } else { 0.0 });
            }
        }
        assert_eq!(m.accuracy(), 1.0);
    }

    #[test]
    fn rows_sum_to_100_when_nonempty() {
        let classes = [1u32, 2];
        let truths = [1, 1, 1, 2, 2];
        let preds = [1, 2, 2, 2, 1];
        let m = confusion_matrix(&truths, &preds, &classes, &names(&classes)).unwrap();
        for (i, row) in m.row_normalized_percent().iter().enumerate() {
            let sum: f64 = row.iter().sum();
            assert!((sum - 100.0).abs() < 0.1, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn empty_rows_are_zero_and_flagged() {
        let classes = [1u32, 2, 3];
        let truths = [1, 1];
        let preds = [1, 3];
        let m = confusion_matrix(&truths, &preds, &classes, &names(&classes)).unwrap();
        assert_eq!(m.empty_rows(), vec![2, 3]);
        assert!(m.row_normalized_percent()[1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unknown_label_is_an_error() {
        let classes = [1u32, 2];
        assert!(confusion_matrix(&[1, 7], &[1, 2], &classes, &names(&classes)).is_err());
    }

    #[test]
    fn uniform_random_predictions_approach_multinomial_expectation() {
        // Six classes, uniform random predictions: every row-normalized
        // entry tends to 100/6 = 16.7.
        let classes: Vec<u32> = (1..=6).collect();
        let n = 60_000;
        let mut state = 99u64;
        let mut next = || {
            state = crate::seeding::splitmix64(state);
            (state % 6) as u32 + 1
        };
        let truths: Vec<u32> = (0..n).map(|i| (i % 6) as u32 + 1).collect();
        let preds: Vec<u32> = (0..n).map(|_| next()).collect();
        let m = confusion_matrix(&truths, &preds, &classes, &names(&classes)).unwrap();
        for row in m.row_normalized_percent() {
            for v in row {
                assert!((v - 16.7).abs() <= 2.0, "entry {v} far from 16.7");
            }
        }
    }
}
