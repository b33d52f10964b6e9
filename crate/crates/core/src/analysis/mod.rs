//! One-way ANOVA per descriptor, LDA projection and feature ranking.

mod anova;
mod eigen;
mod lda;
mod rank;
mod special;

pub use anova::{anova_f, anova_table, f_critical, AnovaResult};
pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use lda::{lda_project, LdaProjection, LDA_RIDGE};
pub use rank::{rank_features, FeatureRank};
pub use special::{f_survival, ln_gamma, regularized_incomplete_beta};
