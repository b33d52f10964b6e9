//! Datasets, stratified splitting, SMOTE, metrics and synthetic data.

mod cv;
mod dataset;
mod metrics;
mod smote;
mod split;
mod synth;

pub use cv::{cross_val_predict, OutOfFold};
pub use dataset::{parse_label, Dataset, CLASS_NAMES};
pub use metrics::{compute_metrics, weighted_f1, ClassMetrics, MetricsReport};
pub use smote::smote;
pub use split::{stratified_kfold, stratified_split, Fold, SplitIndices, DEFAULT_FRACTIONS};
pub use synth::synthesize_dataset;

/// Sample count per class for labels in `0..n_classes`.
pub fn class_counts(y: &[usize], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    counts
}
