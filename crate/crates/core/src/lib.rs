//! Structural descriptors from transillumination images, NEAT-driven
//! hyperparameter search, two native base learners (histogram gradient
//! boosting and an attention-gated MLP), and weighted probability fusion.
//!
//! The crate is organised bottom-up:
//!
//! - [`imaging`]: image loading, specimen segmentation and the 16 descriptors.
//! - [`neat`]: genomes, speciation and evolution of hyperparameter vectors.
//! - [`gbdt`]: multiclass boosted decision trees on histogram bins.
//! - [`mlp`]: attention-gated MLP trained with AdamW, Mixup and label smoothing.
//! - [`pipeline`]: datasets, stratified splits, SMOTE, metrics and synthetic data.
//! - [`fusion`]: Nelder–Mead and weighted fusion of probability matrices.
//! - [`analysis`]: one-way ANOVA, LDA projection and feature ranking.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments
)]

pub mod analysis;
pub mod error;
pub mod fusion;
pub mod gbdt;
pub mod imaging;
pub mod matrix;
pub mod mlp;
pub mod neat;
pub mod pipeline;
pub mod seed;

pub use error::{Error, Result};
pub use matrix::Matrix;

/// Number of structural descriptors per specimen.
pub const N_FEATURES: usize = 16;

/// Number of tissue categories (normal, woody breast, spaghetti meat).
pub const N_CLASSES: usize = 3;

/// Version tag written into every persisted file.
pub const SCHEMA_VERSION: u32 = 1;
