use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::binning::BinMapper;
use super::tree::{grow, GrowParams, Tree};
use crate::error::{Error, Result};
use crate::fusion::ProbabilityMatrix;
use crate::matrix::Matrix;
use crate::neat::{HyperparameterRange, HyperparameterSpec, Hyperparameters};
use crate::{seed, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub num_leaves: usize,
    pub learning_rate: f64,
    pub feature_fraction: f64,
    pub bagging_fraction: f64,
    pub lambda_l1: f64,
    pub lambda_l2: f64,
    pub min_child_samples: usize,
    /// Recorded for completeness; every descriptor is continuous, so it has
    /// no effect on training.
    pub cat_smooth: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_depth: 6,
            num_leaves: 31,
            learning_rate: 0.1,
            feature_fraction: 1.0,
            bagging_fraction: 1.0,
            lambda_l1: 0.0,
            lambda_l2: 1.0,
            min_child_samples: 5,
            cat_smooth: 10.0,
            seed: 0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.n_estimators < 1 {
            return bad("n_estimators must be at least 1");
        }
        if self.num_leaves < 2 {
            return bad("num_leaves must be at least 2");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0)
            || !(self.bagging_fraction > 0.0 && self.bagging_fraction <= 1.0)
        {
            return bad("feature_fraction and bagging_fraction must lie in (0, 1]");
        }
        if !(self.lambda_l1 >= 0.0 && self.lambda_l2 >= 0.0) {
            return bad("lambda_l1 and lambda_l2 must be non-negative");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        Ok(())
    }

    /// Build a config from decoded hyperparameters; missing keys keep defaults.
    pub fn from_hyperparameters(hp: &Hyperparameters, seed: u64) -> Result<Self> {
        let d = Self::default();
        let get = |k: &str, default: f64| hp.get(k).copied().unwrap_or(default);
        let cfg = Self {
            n_estimators: get("n_estimators", d.n_estimators as f64).round() as usize,
            max_depth: get("max_depth", d.max_depth as f64).round() as usize,
            num_leaves: get("num_leaves", d.num_leaves as f64).round() as usize,
            learning_rate: get("learning_rate", d.learning_rate),
            feature_fraction: get("feature_fraction", d.feature_fraction),
            bagging_fraction: get("bagging_fraction", d.bagging_fraction),
            lambda_l1: get("lambda_l1", d.lambda_l1),
            lambda_l2: get("lambda_l2", d.lambda_l2),
            min_child_samples: get("min_child_samples", d.min_child_samples as f64).round() as usize,
            cat_smooth: get("cat_smooth", d.cat_smooth),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The ten evolved boosting hyperparameters and their ranges.
pub fn search_space() -> HyperparameterSpec {
    HyperparameterSpec {
        entries: vec![
            HyperparameterRange::int("n_estimators", 50.0, 500.0),
            HyperparameterRange::int("max_depth", 3.0, 12.0),
            HyperparameterRange::int("num_leaves", 8.0, 128.0),
            HyperparameterRange::log("learning_rate", 1e-3, 0.3),
            HyperparameterRange::linear("feature_fraction", 0.5, 1.0),
            HyperparameterRange::linear("bagging_fraction", 0.5, 1.0),
            HyperparameterRange::log("lambda_l1", 1e-8, 10.0),
            HyperparameterRange::log("lambda_l2", 1e-8, 10.0),
            HyperparameterRange::int("min_child_samples", 2.0, 30.0),
            HyperparameterRange::linear("cat_smooth", 1.0, 100.0),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsembleModel {
    pub schema_version: u32,
    pub n_classes: usize,
    pub n_features: usize,
    pub config: GbdtConfig,
    /// Initial raw score per class: log of the empirical class frequency.
    pub class_priors: Vec<f64>,
    pub bin_mappers: Vec<BinMapper>,
    /// `trees[round][class]`.
    pub trees: Vec<Vec<Tree>>,
    pub feature_gains: Vec<f64>,
}

impl TreeEnsembleModel {
    pub fn raw_scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.class_priors.clone();
        for round in &self.trees {
            for (c, tree) in round.iter().enumerate() {
                s[c] += tree.predict(x);
            }
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidData(format!(
                "unsupported gbdt schema_version {}",
                m.schema_version
            )));
        }
        Ok(m)
    }
}

pub(crate) fn softmax_in_place(s: &mut [f64]) {
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in s.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in s.iter_mut() {
        *v /= sum;
    }
}

fn cross_entropy(scores: &[f64], y: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    let mut p = vec![0.0; k];
    for (i, &label) in y.iter().enumerate() {
        p.copy_from_slice(&scores[i * k..(i + 1) * k]);
        softmax_in_place(&mut p);
        total -= p[label].max(f64::MIN_POSITIVE).ln();
    }
    total / y.len() as f64
}

fn check_training_data(x: &Matrix, y: &[usize]) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::InvalidData("empty dataset".into()));
    }
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if !x.all_finite() {
        return Err(Error::InvalidData("non-finite feature value".into()));
    }
    let first = y[0];
    if y.iter().all(|&c| c == first) {
        return Err(Error::InvalidData("training data holds a single class".into()));
    }
    Ok(())
}

/// Fit with `n_classes = max(y) + 1`.
pub fn fit(x: &Matrix, y: &[usize], cfg: &GbdtConfig) -> Result<TreeEnsembleModel> {
    let k = y.iter().max().map_or(0, |m| m + 1);
    fit_with_classes(x, y, k, cfg)
}

pub fn fit_with_classes(x: &Matrix, y: &[usize], n_classes: usize, cfg: &GbdtConfig) -> Result<TreeEnsembleModel> {
    fit_traced(x, y, n_classes, cfg).map(|(m, _)| m)
}

/// Fit and also return the training cross-entropy before the first round
/// and after every round.
pub fn fit_traced(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    cfg: &GbdtConfig,
) -> Result<(TreeEnsembleModel, Vec<f64>)> {
    cfg.validate()?;
    check_training_data(x, y)?;
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidData(format!("label {bad} >= n_classes {n_classes}")));
    }
    let (n, nf, k) = (x.rows(), x.cols(), n_classes);
    let mut rng = seed::rng(cfg.seed, "gbdt", &[]);

    let bin_mappers: Vec<BinMapper> = (0..nf).map(|f| BinMapper::fit(&x.column(f))).collect();
    let bins: Vec<Vec<u8>> = (0..nf)
        .map(|f| (0..n).map(|i| bin_mappers[f].bin(x.get(i, f))).collect())
        .collect();
    let n_bins: Vec<usize> = bin_mappers.iter().map(BinMapper::n_bins).collect();
    let thresholds: Vec<Vec<f64>> = bin_mappers.iter().map(|m| m.upper_bounds.clone()).collect();

    let mut counts = vec![0usize; k];
    for &c in y {
        counts[c] += 1;
    }
    let class_priors: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).max(1e-6).ln()).collect();

    let mut scores: Vec<f64> = (0..n).flat_map(|_| class_priors.iter().copied()).collect();
    let mut losses = vec![cross_entropy(&scores, y, k)];
    let mut trees = Vec::with_capacity(cfg.n_estimators);
    let mut feature_gains = vec![0.0; nf];
    let n_feat = ((cfg.feature_fraction * nf as f64).ceil() as usize).clamp(1, nf);
    let n_rows = ((cfg.bagging_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut all_rows: Vec<usize> = (0..n).collect();
    let mut all_feats: Vec<usize> = (0..nf).collect();
    let (mut grad, mut hess) = (vec![0.0; n], vec![0.0; n]);
    let mut probs = vec![0.0; n * k];

    for _round in 0..cfg.n_estimators {
        for i in 0..n {
            let p = &mut probs[i * k..(i + 1) * k];
            p.copy_from_slice(&scores[i * k..(i + 1) * k]);
            softmax_in_place(p);
        }
        let rows: Vec<usize> = if n_rows < n {
            all_rows.shuffle(&mut rng);
            let mut r = all_rows[..n_rows].to_vec();
            r.sort_unstable();
            r
        } else {
            (0..n).collect()
        };
        let mut round = Vec::with_capacity(k);
        for c in 0..k {
            for i in 0..n {
                let p = probs[i * k + c];
                grad[i] = p - if y[i] == c { 1.0 } else { 0.0 };
                hess[i] = p * (1.0 - p);
            }
            let features: Vec<usize> = if n_feat < nf {
                all_feats.shuffle(&mut rng);
                let mut f = all_feats[..n_feat].to_vec();
                f.sort_unstable();
                f
            } else {
                (0..nf).collect()
            };
            let params = GrowParams {
                bins: &bins,
                n_bins: &n_bins,
                features: &features,
                grad: &grad,
                hess: &hess,
                max_depth: cfg.max_depth,
                num_leaves: cfg.num_leaves,
                min_child_samples: cfg.min_child_samples.max(1),
                lambda_l1: cfg.lambda_l1,
                lambda_l2: cfg.lambda_l2,
                learning_rate: cfg.learning_rate,
            };
            let tree = grow(&params, rows.clone(), &thresholds);
            for node in &tree.nodes {
                if let super::Node::Split { feature, gain, .. } = node {
                    feature_gains[*feature] += gain;
                }
            }
            round.push(tree);
        }
        for i in 0..n {
            let row = x.row(i);
            for (c, tree) in round.iter().enumerate() {
                scores[i * k + c] += tree.predict(row);
            }
        }
        losses.push(cross_entropy(&scores, y, k));
        trees.push(round);
    }

    let model = TreeEnsembleModel {
        schema_version: SCHEMA_VERSION,
        n_classes: k,
        n_features: nf,
        config: cfg.clone(),
        class_priors,
        bin_mappers,
        trees,
        feature_gains,
    };
    Ok((model, losses))
}

/// Softmax class probabilities for each row of `x`.
pub fn predict_proba(model: &TreeEnsembleModel, x: &Matrix) -> Result<ProbabilityMatrix> {
    if x.cols() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            actual: x.cols(),
        });
    }
    let mut out = Matrix::zeros(x.rows(), model.n_classes);
    for (i, row) in x.iter_rows().enumerate() {
        let mut s = model.raw_scores(row);
        softmax_in_place(&mut s);
        out.row_mut(i).copy_from_slice(&s);
    }
    ProbabilityMatrix::new(out)
}

/// Features ranked by cumulative split gain, descending; ties by index.
pub fn feature_importance(model: &TreeEnsembleModel) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = model.feature_gains.iter().copied().enumerate().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}
