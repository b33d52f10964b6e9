use rand::seq::SliceRandom;
use rand_distr::{Beta, Distribution};

use super::network::{backward, forward_eval, forward_train, loss, BatchNormStats, MlpModel, MlpParams, Standardizer};
use super::MlpConfig;
use crate::error::{Error, Result};
use crate::fusion::ProbabilityMatrix;
use crate::matrix::Matrix;
use crate::seed::{self, Rng};
use crate::SCHEMA_VERSION;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Cosine-annealed learning rate for `epoch` of `epochs`; reaches 0 at
/// `epoch == epochs`.
pub fn cosine_lr(base: f64, epoch: usize, epochs: usize) -> f64 {
    base * 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / epochs as f64).cos())
}

/// Smoothed one-hot targets: `1 - eps` on the true class and
/// `eps / (C - 1)` elsewhere.
pub fn smooth_labels(y: &[usize], n_classes: usize, eps: f64) -> Matrix {
    let off = if n_classes > 1 {
        eps / (n_classes - 1) as f64
    } else {
        0.0
    };
    let mut t = Matrix::zeros(y.len(), n_classes);
    for (i, &c) in y.iter().enumerate() {
        for (j, v) in t.row_mut(i).iter_mut().enumerate() {
            *v = if j == c { 1.0 - eps } else { off };
        }
    }
    t
}

/// Blend each row `i` with row `perm[i]` using weight `lambda`.
pub fn mixup_with(x: &Matrix, t: &Matrix, lambda: f64, perm: &[usize]) -> (Matrix, Matrix) {
    let blend = |m: &Matrix| {
        let mut out = m.clone();
        for (i, &j) in perm.iter().enumerate() {
            let other = m.row(j);
            for (o, (a, b)) in out.row_mut(i).iter_mut().zip(m.row(i).iter().zip(other)) {
                *o = lambda * a + (1.0 - lambda) * b;
            }
        }
        out
    };
    (blend(x), blend(t))
}

/// Mixup with one `lambda ~ Beta(a, a)` per batch and partners drawn by a
/// random permutation; `a = 0` returns the batch unchanged.
pub fn mixup_batch(x: &Matrix, t: &Matrix, a: f64, rng: &mut Rng) -> (Matrix, Matrix) {
    if a <= 0.0 || x.rows() < 2 {
        return (x.clone(), t.clone());
    }
    let lambda = Beta::new(a, a).expect("a > 0").sample(rng);
    let mut perm: Vec<usize> = (0..x.rows()).collect();
    perm.shuffle(rng);
    mixup_with(x, t, lambda, &perm)
}

struct AdamW {
    m: MlpParams,
    v: MlpParams,
    t: i32,
}

impl AdamW {
    fn new(p: &MlpParams) -> Self {
        Self {
            m: p.zeros_like(),
            v: p.zeros_like(),
            t: 0,
        }
    }

    fn step(&mut self, p: &mut MlpParams, g: &MlpParams, lr: f64, weight_decay: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t);
        let groups = p
            .groups_mut()
            .into_iter()
            .zip(g.groups())
            .zip(self.m.groups_mut())
            .zip(self.v.groups_mut());
        for ((((name, theta), (_, grad)), (_, m)), (_, v)) in groups {
            let decay = matches!(name, "attention_w" | "w1" | "w2" | "w3");
            for k in 0..theta.len() {
                m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * grad[k];
                v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * grad[k] * grad[k];
                if decay {
                    theta[k] -= lr * weight_decay * theta[k];
                }
                theta[k] -= lr * (m[k] / bc1) / ((v[k] / bc2).sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Mini-batches of a shuffled order; a trailing single row joins the
/// previous batch so batch statistics are always defined.
fn batches(order: &[usize], size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = order.chunks(size).collect();
    if out.len() > 1 && out.last().is_some_and(|b| b.len() == 1) {
        out.pop();
        let start = (out.len() - 1) * size;
        *out.last_mut().expect("non-empty") = &order[start..];
    }
    out
}

pub fn train(x: &Matrix, y: &[usize], cfg: &MlpConfig) -> Result<MlpModel> {
    let k = y.iter().max().map_or(0, |m| m + 1);
    train_with_classes(x, y, k, cfg)
}

pub fn train_with_classes(x: &Matrix, y: &[usize], n_classes: usize, cfg: &MlpConfig) -> Result<MlpModel> {
    train_traced(x, y, n_classes, cfg).map(|(m, _)| m)
}

/// Train on raw features (standardized internally) and return the mean
/// mini-batch loss of every epoch.
pub fn train_traced(x: &Matrix, y: &[usize], n_classes: usize, cfg: &MlpConfig) -> Result<(MlpModel, Vec<f64>)> {
    cfg.validate()?;
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if x.rows() < 2 || !x.all_finite() {
        return Err(Error::InvalidData("mlp needs at least 2 finite rows".into()));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidData(format!("label {bad} >= n_classes {n_classes}")));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::InvalidData("training data holds a single class".into()));
    }

    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let targets = smooth_labels(y, n_classes, cfg.label_smoothing);
    let (d, h) = (x.cols(), cfg.hidden_size);
    let mut params = MlpParams::init(d, h, n_classes, &mut seed::rng(cfg.seed, "mlp-init", &[]));
    let mut rng = seed::rng(cfg.seed, "mlp-train", &[]);
    let (mut bn1, mut bn2) = (BatchNormStats::new(h), BatchNormStats::new(h));
    let mut opt = AdamW::new(&params);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(cfg.learning_rate, epoch, cfg.epochs);
        order.shuffle(&mut rng);
        let (mut total, mut count) = (0.0, 0);
        for batch in batches(&order, cfg.batch_size) {
            let bx = xs.select_rows(batch);
            let bt = targets.select_rows(batch);
            let (bx, bt) = mixup_batch(&bx, &bt, cfg.mixup_alpha, &mut rng);
            let b = batch.len();
            let cache = forward_train(&params, bx.as_slice(), b, cfg.dropout, Some(&mut rng));
            let l = loss(&cache, bt.as_slice(), b);
            if !l.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            total += l * b as f64;
            count += b;
            let grads = backward(&params, bx.as_slice(), b, &cache, bt.as_slice());
            opt.step(&mut params, &grads, lr, cfg.weight_decay);
            bn1.update(&cache.l1.mean, &cache.l1.var, b);
            bn2.update(&cache.l2.mean, &cache.l2.var, b);
        }
        losses.push(total / count as f64);
        if !params.all_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
    }

    let model = MlpModel {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        standardizer,
        params,
        bn1,
        bn2,
    };
    Ok((model, losses))
}

/// Eval-mode class probabilities for raw feature rows.
pub fn predict_proba(model: &MlpModel, x: &Matrix) -> Result<ProbabilityMatrix> {
    if x.cols() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: x.cols(),
        });
    }
    if !x.all_finite() {
        return Err(Error::InvalidData("non-finite input".into()));
    }
    let xs = model.standardizer.transform(x);
    let p = forward_eval(&model.params, &model.bn1, &model.bn2, xs.as_slice(), x.rows());
    ProbabilityMatrix::new(Matrix::from_vec(x.rows(), model.n_classes(), p)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    /// Worst relative error within each parameter group.
    pub per_group: Vec<(&'static str, f64)>,
}

const FD_STEP: f64 = 1e-5;

/// Compare backpropagated gradients with central differences on a batch
/// of standardized rows and soft targets. Dropout is off and batch norm
/// uses batch statistics.
pub fn gradient_check(model: &MlpModel, x: &Matrix, targets: &Matrix) -> Result<GradientCheck> {
    gradient_check_tampered(model, x, targets, |_| {})
}

/// [`gradient_check`] with a hook that may alter the analytic gradients
/// before comparison.
pub fn gradient_check_tampered<F: FnOnce(&mut MlpParams)>(
    model: &MlpModel,
    x: &Matrix,
    targets: &Matrix,
    tamper: F,
) -> Result<GradientCheck> {
    if x.rows() < 2 || x.rows() != targets.rows() || targets.cols() != model.n_classes() {
        return Err(Error::InvalidData(
            "gradient check needs a matching batch of >= 2 rows".into(),
        ));
    }
    if x.cols() != model.n_features() {
        return Err(Error::DimensionMismatch {
            expected: model.n_features(),
            actual: x.cols(),
        });
    }
    let b = x.rows();
    let eval = |p: &MlpParams| loss(&forward_train(p, x.as_slice(), b, 0.0, None), targets.as_slice(), b);
    let cache = forward_train(&model.params, x.as_slice(), b, 0.0, None);
    let mut analytic = backward(&model.params, x.as_slice(), b, &cache, targets.as_slice());
    tamper(&mut analytic);

    let mut probe = model.params.clone();
    let mut per_group = Vec::new();
    for (gi, (name, grads)) in analytic.groups().into_iter().enumerate() {
        let mut worst: f64 = 0.0;
        for k in 0..grads.len() {
            let original = probe.groups()[gi].1[k];
            probe.groups_mut()[gi].1[k] = original + FD_STEP;
            let up = eval(&probe);
            probe.groups_mut()[gi].1[k] = original - FD_STEP;
            let down = eval(&probe);
            probe.groups_mut()[gi].1[k] = original;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = grads[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
        }
        per_group.push((name, worst));
    }
    let max_relative_error = per_group.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Ok(GradientCheck {
        max_relative_error,
        per_group,
    })
}
