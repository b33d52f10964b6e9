//! Weighted probability fusion and the Nelder–Mead search for its weights.

mod fuse;
mod nelder_mead;

pub use fuse::{fuse, optimize_weights, EnsembleWeights, ProbabilityMatrix, WeightFit};
pub use nelder_mead::{nelder_mead, NelderMeadParams, NelderMeadResult};
