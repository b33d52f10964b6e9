//! Multiclass gradient-boosted decision trees on quantile histogram bins.
//!
//! Each boosting round fits one leaf-wise regression tree per class to the
//! softmax cross-entropy gradients `p - 1[y = c]` and hessians `p (1 - p)`.

mod binning;
mod model;
mod tree;

pub use binning::{BinMapper, MAX_BINS};
pub use model::{
    feature_importance, fit, fit_traced, fit_with_classes, predict_proba, search_space, GbdtConfig, TreeEnsembleModel,
};
pub use tree::{leaf_value, split_gain, Node, Tree};
