use neatboost::fusion::ProbabilityMatrix;
use neatboost::gbdt::{self, GbdtConfig, TreeEnsembleModel};
use neatboost::mlp::{self, MlpConfig, MlpModel};
use neatboost::neat::Hyperparameters;
use neatboost::pipeline::{cross_val_predict, Fold, OutOfFold};
use neatboost::{Matrix, Result, N_CLASSES};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Gbdt,
    Mlp,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 2] = [LearnerKind::Gbdt, LearnerKind::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Gbdt => "gbdt",
            LearnerKind::Mlp => "mlp",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Gbdt(TreeEnsembleModel),
    Mlp(Box<MlpModel>),
}

impl TrainedModel {
    pub fn predict(&self, x: &Matrix) -> Result<ProbabilityMatrix> {
        match self {
            TrainedModel::Gbdt(m) => gbdt::predict_proba(m, x),
            TrainedModel::Mlp(m) => mlp::predict_proba(m, x),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            TrainedModel::Gbdt(m) => m.to_json(),
            TrainedModel::Mlp(m) => m.to_json(),
        }
    }

    pub fn from_json(kind: LearnerKind, s: &str) -> Result<Self> {
        Ok(match kind {
            LearnerKind::Gbdt => TrainedModel::Gbdt(TreeEnsembleModel::from_json(s)?),
            LearnerKind::Mlp => TrainedModel::Mlp(Box::new(MlpModel::from_json(s)?)),
        })
    }
}

pub fn fit(kind: LearnerKind, hp: &Hyperparameters, x: &Matrix, y: &[usize], seed: u64) -> Result<TrainedModel> {
    Ok(match kind {
        LearnerKind::Gbdt => {
            let cfg = GbdtConfig::from_hyperparameters(hp, seed)?;
            TrainedModel::Gbdt(gbdt::fit_with_classes(x, y, N_CLASSES, &cfg)?)
        }
        LearnerKind::Mlp => {
            let cfg = MlpConfig::from_hyperparameters(hp, seed)?;
            TrainedModel::Mlp(Box::new(mlp::train_with_classes(x, y, N_CLASSES, &cfg)?))
        }
    })
}

/// Out-of-fold probabilities of one learner configuration.
pub fn out_of_fold(
    kind: LearnerKind,
    hp: &Hyperparameters,
    x: &Matrix,
    y: &[usize],
    folds: &[Fold],
    smote_k: Option<usize>,
    seed: u64,
) -> Result<OutOfFold> {
    cross_val_predict(x, y, N_CLASSES, folds, smote_k, seed, |tx, ty, vx, f| {
        let model = fit(kind, hp, tx, ty, neatboost::seed::derive(seed, "fold-fit", &[f as u64]))?;
        model.predict(vx)
    })
}
