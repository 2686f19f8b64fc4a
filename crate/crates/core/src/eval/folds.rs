//! Leave-one-trial-out fold construction.
//!
//! "Trial" means the repetition index: each fold holds out one repetition
//! of one subject across all gestures (and all positions, where present),
//! so the position stage and the gesture stage of the sequential task share
//! the same folds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// One cross-validation fold; indices point into the source matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub held_out_repetition: u32,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// All folds of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub subject: u32,
    pub folds: Vec<Fold>,
}

/// Build the leave-one-repetition-out plan for one subject over the rows of
/// `matrix` selected by `row_filter` (e.g. gesture exclusions).
///
/// Folds partition the selected rows: every repetition is held out exactly
/// once, train and test are disjoint, and their union is the row set.
pub fn make_loto_folds(
    matrix: &FeatureMatrix,
    subject: u32,
    row_filter: impl Fn(usize) -> bool,
) -> Result<FoldPlan> {
    let rows: Vec<usize> = matrix
        .rows
        .iter()
        .enumerate()
        .filter(|(i, r)| r.labels.subject == subject && row_filter(*i))
        .map(|(i, _)| i)
        .collect();
    if rows.is_empty() {
        return Err(Error::Task(format!("subject {subject} has no rows")));
    }
    let mut repetitions: Vec<u32> =
        rows.iter().map(|&i| matrix.rows[i].labels.repetition).collect();
    repetitions.sort_unstable();
    repetitions.dedup();
    if repetitions.len() < 2 {
        return Err(Error::Task(format!(
            "subject {subject} has a single repetition; leave-one-trial-out needs at least 2"
        )));
    }

    let folds = repetitions
        .iter()
        .map(|&rep| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| matrix.rows[i].labels.repetition == rep);
            Fold { held_out_repetition: rep, train, test }
        })
        .collect();
    Ok(FoldPlan { subject, folds })
}
