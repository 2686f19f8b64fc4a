//! Cross-validation folds, the three classification tasks, metric
//! aggregation, confusion matrices and paired significance testing.

mod confusion;
mod folds;
mod stats;
mod tasks;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use folds::{make_loto_folds, Fold, FoldPlan};
pub use stats::{compare_paired, ComparisonResult, ALPHA, EXACT_LIMIT};
pub use tasks::{
    fit_on_rows, run_position_task, run_sequential_task, run_within_position_task, FoldAccuracy,
    LabelTarget, PositionRouting, PredictionRecord, SubjectAccuracies, TaskKind, TaskOptions,
    TaskResult,
};
