use rand::Rng as _;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::MlpConfig;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed::Rng;
use crate::SCHEMA_VERSION;

pub(crate) const BN_EPS: f64 = 1e-5;
pub(crate) const BN_MOMENTUM: f64 = 0.1;

/// Per-feature z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let (mean, std) = (0..x.cols())
            .map(|j| {
                let col = x.column(j);
                let m = col.iter().sum::<f64>() / n;
                let v = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
                let s = v.sqrt();
                (m, if s > 1e-12 { s } else { 1.0 })
            })
            .unzip();
        Self { mean, std }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        out
    }
}

/// All trainable parameters. Weight matrices are row-major `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub attention_w: Vec<f64>,
    pub attention_b: Vec<f64>,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub gamma1: Vec<f64>,
    pub beta1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub gamma2: Vec<f64>,
    pub beta2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

impl MlpParams {
    pub(crate) fn init(d: usize, h: usize, c: usize, rng: &mut Rng) -> Self {
        let mut uniform = |fan_in: usize, n: usize| -> Vec<f64> {
            let r = 1.0 / (fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-r, r).expect("finite bound");
            (0..n).map(|_| dist.sample(rng)).collect()
        };
        let (w1, b1) = (uniform(d, h * d), uniform(d, h));
        let (w2, b2) = (uniform(h, h * h), uniform(h, h));
        let (w3, b3) = (uniform(h, c * h), uniform(h, c));
        let gate = Normal::new(0.0, 0.1).expect("valid sd");
        Self {
            attention_w: (0..d).map(|_| gate.sample(rng)).collect(),
            attention_b: vec![0.0; d],
            w1,
            b1,
            gamma1: vec![1.0; h],
            beta1: vec![0.0; h],
            w2,
            b2,
            gamma2: vec![1.0; h],
            beta2: vec![0.0; h],
            w3,
            b3,
        }
    }

    pub fn n_features(&self) -> usize {
        self.attention_w.len()
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    pub fn n_classes(&self) -> usize {
        self.b3.len()
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, g) in z.groups_mut() {
            g.fill(0.0);
        }
        z
    }

    pub fn groups(&self) -> [(&'static str, &Vec<f64>); 12] {
        [
            ("attention_w", &self.attention_w),
            ("attention_b", &self.attention_b),
            ("w1", &self.w1),
            ("b1", &self.b1),
            ("gamma1", &self.gamma1),
            ("beta1", &self.beta1),
            ("w2", &self.w2),
            ("b2", &self.b2),
            ("gamma2", &self.gamma2),
            ("beta2", &self.beta2),
            ("w3", &self.w3),
            ("b3", &self.b3),
        ]
    }

    pub fn groups_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 12] {
        [
            ("attention_w", &mut self.attention_w),
            ("attention_b", &mut self.attention_b),
            ("w1", &mut self.w1),
            ("b1", &mut self.b1),
            ("gamma1", &mut self.gamma1),
            ("beta1", &mut self.beta1),
            ("w2", &mut self.w2),
            ("b2", &mut self.b2),
            ("gamma2", &mut self.gamma2),
            ("beta2", &mut self.beta2),
            ("w3", &mut self.w3),
            ("b3", &mut self.b3),
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.groups().iter().all(|(_, g)| g.iter().all(|v| v.is_finite()))
    }

    pub(crate) fn check_shapes(&self) -> Result<()> {
        let (d, h, c) = (self.n_features(), self.hidden(), self.n_classes());
        let expect = [d, d, h * d, h, h, h, h * h, h, h, h, c * h, c];
        for ((name, g), n) in self.groups().iter().zip(expect) {
            if g.len() != n {
                return Err(Error::InvalidData(format!(
                    "parameter {name} has {} values, expected {n}",
                    g.len()
                )));
            }
        }
        Ok(())
    }
}

/// Running batch-norm statistics used in eval mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl BatchNormStats {
    pub(crate) fn new(h: usize) -> Self {
        Self {
            mean: vec![0.0; h],
            var: vec![1.0; h],
        }
    }

    /// Exponential update from batch moments; `var` is the biased batch
    /// variance and is corrected to the unbiased estimate here.
    pub(crate) fn update(&mut self, mean: &[f64], var: &[f64], batch: usize) {
        let correction = if batch > 1 {
            batch as f64 / (batch - 1) as f64
        } else {
            1.0
        };
        for j in 0..self.mean.len() {
            self.mean[j] = (1.0 - BN_MOMENTUM) * self.mean[j] + BN_MOMENTUM * mean[j];
            self.var[j] = (1.0 - BN_MOMENTUM) * self.var[j] + BN_MOMENTUM * var[j] * correction;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub schema_version: u32,
    pub config: MlpConfig,
    pub standardizer: Standardizer,
    pub params: MlpParams,
    pub bn1: BatchNormStats,
    pub bn2: BatchNormStats,
}

/// Forward-pass mode. `Train` uses batch statistics and, when an RNG is
/// supplied, dropout.
pub enum Mode<'a> {
    Eval,
    Train(Option<&'a mut Rng>),
}

impl MlpModel {
    pub fn n_features(&self) -> usize {
        self.params.n_features()
    }

    pub fn n_classes(&self) -> usize {
        self.params.n_classes()
    }

    /// Class probabilities for already standardized rows.
    pub fn forward(&self, x: &Matrix, mode: Mode) -> Result<Matrix> {
        if x.cols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.cols(),
            });
        }
        if !x.all_finite() {
            return Err(Error::InvalidData("non-finite input to forward".into()));
        }
        let b = x.rows();
        let probs = match mode {
            Mode::Eval => forward_eval(&self.params, &self.bn1, &self.bn2, x.as_slice(), b),
            Mode::Train(rng) => forward_train(&self.params, x.as_slice(), b, self.config.dropout, rng).probs,
        };
        Matrix::from_vec(b, self.n_classes(), probs)
    }

    /// Attention gates for one standardized row.
    pub fn attention(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.params.attention_w.iter().zip(&self.params.attention_b))
            .map(|(v, (w, b))| sigmoid(w * v + b))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedFormat(format!(
                "mlp schema version {}",
                m.schema_version
            )));
        }
        m.params.check_shapes()?;
        if !m.params.all_finite() {
            return Err(Error::InvalidData("non-finite mlp parameter".into()));
        }
        Ok(m)
    }
}

#[inline]
pub(crate) fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[inline]
fn gelu(v: f64) -> f64 {
    0.5 * v * (1.0 + libm::erf(v / std::f64::consts::SQRT_2))
}

#[inline]
fn gelu_grad(v: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(v / std::f64::consts::SQRT_2));
    let pdf = (-0.5 * v * v).exp() / (2.0 * std::f64::consts::PI).sqrt();
    cdf + v * pdf
}

/// `out[i, o] = bias[o] + sum_k x[i, k] w[o, k]`.
fn affine(x: &[f64], b: usize, din: usize, w: &[f64], bias: &[f64]) -> Vec<f64> {
    let dout = bias.len();
    let mut out = Vec::with_capacity(b * dout);
    for i in 0..b {
        let xi = &x[i * din..(i + 1) * din];
        for o in 0..dout {
            let wo = &w[o * din..(o + 1) * din];
            out.push(bias[o] + xi.iter().zip(wo).map(|(a, c)| a * c).sum::<f64>());
        }
    }
    out
}

/// Accumulates weight and bias gradients of [`affine`] and returns the
/// gradient with respect to its input.
fn affine_backward(x: &[f64], b: usize, din: usize, w: &[f64], dz: &[f64], dw: &mut [f64], db: &mut [f64]) -> Vec<f64> {
    let dout = db.len();
    let mut dx = vec![0.0; b * din];
    for i in 0..b {
        let xi = &x[i * din..(i + 1) * din];
        let dxi = &mut dx[i * din..(i + 1) * din];
        for o in 0..dout {
            let g = dz[i * dout + o];
            if g == 0.0 {
                continue;
            }
            db[o] += g;
            let wo = &w[o * din..(o + 1) * din];
            let dwo = &mut dw[o * din..(o + 1) * din];
            for k in 0..din {
                dwo[k] += g * xi[k];
                dxi[k] += g * wo[k];
            }
        }
    }
    dx
}

pub(crate) struct HiddenCache {
    pub xhat: Vec<f64>,
    pub inv_std: Vec<f64>,
    pub pre: Vec<f64>,
    pub mask: Option<Vec<f64>>,
    pub out: Vec<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

fn hidden_train(
    x: &[f64],
    b: usize,
    din: usize,
    w: &[f64],
    bias: &[f64],
    gamma: &[f64],
    beta: &[f64],
    dropout: f64,
    rng: Option<&mut Rng>,
) -> HiddenCache {
    let h = bias.len();
    let z = affine(x, b, din, w, bias);
    let mut mean = vec![0.0; h];
    let mut var = vec![0.0; h];
    for i in 0..b {
        for j in 0..h {
            mean[j] += z[i * h + j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= b as f64);
    for i in 0..b {
        for j in 0..h {
            let d = z[i * h + j] - mean[j];
            var[j] += d * d;
        }
    }
    var.iter_mut().for_each(|v| *v /= b as f64);
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
    let mut xhat = vec![0.0; b * h];
    let mut pre = vec![0.0; b * h];
    for i in 0..b {
        for j in 0..h {
            let k = i * h + j;
            xhat[k] = (z[k] - mean[j]) * inv_std[j];
            pre[k] = gamma[j] * xhat[k] + beta[j];
        }
    }
    let mut out: Vec<f64> = pre.iter().map(|&v| gelu(v)).collect();
    let mask = match rng {
        Some(rng) if dropout > 0.0 => {
            let keep = 1.0 / (1.0 - dropout);
            let m: Vec<f64> = (0..b * h)
                .map(|_| if rng.random::<f64>() < dropout { 0.0 } else { keep })
                .collect();
            out.iter_mut().zip(&m).for_each(|(o, s)| *o *= s);
            Some(m)
        }
        _ => None,
    };
    HiddenCache {
        xhat,
        inv_std,
        pre,
        mask,
        out,
        mean,
        var,
    }
}

pub(crate) struct HiddenGrads<'a> {
    pub w: &'a mut [f64],
    pub b: &'a mut [f64],
    pub gamma: &'a mut [f64],
    pub beta: &'a mut [f64],
}

fn hidden_backward(
    c: &HiddenCache,
    x: &[f64],
    b: usize,
    din: usize,
    w: &[f64],
    gamma: &[f64],
    dout: &[f64],
    g: HiddenGrads,
) -> Vec<f64> {
    let h = gamma.len();
    let mut dy = vec![0.0; b * h];
    for k in 0..b * h {
        let d = match &c.mask {
            Some(m) => dout[k] * m[k],
            None => dout[k],
        };
        dy[k] = d * gelu_grad(c.pre[k]);
    }
    let mut dz = vec![0.0; b * h];
    for j in 0..h {
        let (mut sum_dxhat, mut sum_dxhat_xhat) = (0.0, 0.0);
        for i in 0..b {
            let k = i * h + j;
            g.gamma[j] += dy[k] * c.xhat[k];
            g.beta[j] += dy[k];
            let dxhat = dy[k] * gamma[j];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * c.xhat[k];
        }
        let nb = b as f64;
        for i in 0..b {
            let k = i * h + j;
            let dxhat = dy[k] * gamma[j];
            dz[k] = c.inv_std[j] / nb * (nb * dxhat - sum_dxhat - c.xhat[k] * sum_dxhat_xhat);
        }
    }
    affine_backward(x, b, din, w, &dz, g.w, g.b)
}

pub(crate) struct TrainCache {
    pub alpha: Vec<f64>,
    pub xt: Vec<f64>,
    pub l1: HiddenCache,
    pub l2: HiddenCache,
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
}

fn softmax_rows(logits: &[f64], b: usize, c: usize) -> (Vec<f64>, Vec<f64>) {
    let mut probs = vec![0.0; b * c];
    let mut logp = vec![0.0; b * c];
    for i in 0..b {
        let row = &logits[i * c..(i + 1) * c];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        for j in 0..c {
            logp[i * c + j] = row[j] - lse;
            probs[i * c + j] = logp[i * c + j].exp();
        }
    }
    (probs, logp)
}

fn gate(p: &MlpParams, x: &[f64], b: usize) -> (Vec<f64>, Vec<f64>) {
    let d = p.n_features();
    let mut alpha = vec![0.0; b * d];
    let mut xt = vec![0.0; b * d];
    for i in 0..b {
        for k in 0..d {
            let v = x[i * d + k];
            let a = sigmoid(p.attention_w[k] * v + p.attention_b[k]);
            alpha[i * d + k] = a;
            xt[i * d + k] = a * v;
        }
    }
    (alpha, xt)
}

pub(crate) fn forward_train(p: &MlpParams, x: &[f64], b: usize, dropout: f64, mut rng: Option<&mut Rng>) -> TrainCache {
    let (d, h, c) = (p.n_features(), p.hidden(), p.n_classes());
    let (alpha, xt) = gate(p, x, b);
    let l1 = hidden_train(
        &xt,
        b,
        d,
        &p.w1,
        &p.b1,
        &p.gamma1,
        &p.beta1,
        dropout,
        rng.as_deref_mut(),
    );
    let l2 = hidden_train(&l1.out, b, h, &p.w2, &p.b2, &p.gamma2, &p.beta2, dropout, rng);
    let logits = affine(&l2.out, b, h, &p.w3, &p.b3);
    let (probs, log_probs) = softmax_rows(&logits, b, c);
    TrainCache {
        alpha,
        xt,
        l1,
        l2,
        probs,
        log_probs,
    }
}

/// Mean soft-target cross-entropy of a cached forward pass.
pub(crate) fn loss(cache: &TrainCache, targets: &[f64], b: usize) -> f64 {
    -cache.log_probs.iter().zip(targets).map(|(l, t)| l * t).sum::<f64>() / b as f64
}

/// Gradients of [`loss`] with respect to every parameter.
pub(crate) fn backward(p: &MlpParams, x: &[f64], b: usize, cache: &TrainCache, targets: &[f64]) -> MlpParams {
    let (d, h) = (p.n_features(), p.hidden());
    let mut g = p.zeros_like();
    let dlogits: Vec<f64> = cache
        .probs
        .iter()
        .zip(targets)
        .map(|(pr, t)| (pr - t) / b as f64)
        .collect();
    let dh2 = affine_backward(&cache.l2.out, b, h, &p.w3, &dlogits, &mut g.w3, &mut g.b3);
    let dh1 = hidden_backward(
        &cache.l2,
        &cache.l1.out,
        b,
        h,
        &p.w2,
        &p.gamma2,
        &dh2,
        HiddenGrads {
            w: &mut g.w2,
            b: &mut g.b2,
            gamma: &mut g.gamma2,
            beta: &mut g.beta2,
        },
    );
    let dxt = hidden_backward(
        &cache.l1,
        &cache.xt,
        b,
        d,
        &p.w1,
        &p.gamma1,
        &dh1,
        HiddenGrads {
            w: &mut g.w1,
            b: &mut g.b1,
            gamma: &mut g.gamma1,
            beta: &mut g.beta1,
        },
    );
    for i in 0..b {
        for k in 0..d {
            let idx = i * d + k;
            let a = cache.alpha[idx];
            let du = dxt[idx] * x[idx] * a * (1.0 - a);
            g.attention_w[k] += du * x[idx];
            g.attention_b[k] += du;
        }
    }
    g
}

fn hidden_eval(
    x: &[f64],
    b: usize,
    din: usize,
    w: &[f64],
    bias: &[f64],
    gamma: &[f64],
    beta: &[f64],
    s: &BatchNormStats,
) -> Vec<f64> {
    let h = bias.len();
    let mut z = affine(x, b, din, w, bias);
    for i in 0..b {
        for j in 0..h {
            let k = i * h + j;
            let xhat = (z[k] - s.mean[j]) / (s.var[j] + BN_EPS).sqrt();
            z[k] = gelu(gamma[j] * xhat + beta[j]);
        }
    }
    z
}

pub(crate) fn forward_eval(p: &MlpParams, bn1: &BatchNormStats, bn2: &BatchNormStats, x: &[f64], b: usize) -> Vec<f64> {
    let (d, h, c) = (p.n_features(), p.hidden(), p.n_classes());
    let (_, xt) = gate(p, x, b);
    let h1 = hidden_eval(&xt, b, d, &p.w1, &p.b1, &p.gamma1, &p.beta1, bn1);
    let h2 = hidden_eval(&h1, b, h, &p.w2, &p.b2, &p.gamma2, &p.beta2, bn2);
    let logits = affine(&h2, b, h, &p.w3, &p.b3);
    softmax_rows(&logits, b, c).0
}
