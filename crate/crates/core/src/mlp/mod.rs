//! Attention-gated MLP: per-feature sigmoid gates, two hidden layers of
//! affine, batch norm, GELU and dropout, and a softmax output.

mod config;
mod network;
mod train;

pub use config::{search_space, MlpConfig};
pub use network::{BatchNormStats, MlpModel, MlpParams, Mode, Standardizer};
pub use train::{
    cosine_lr, gradient_check, gradient_check_tampered, mixup_batch, mixup_with, predict_proba, smooth_labels, train,
    train_traced, train_with_classes, GradientCheck,
};
