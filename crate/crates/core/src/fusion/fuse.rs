use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadParams};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pipeline::weighted_f1;

/// Row-stochastic matrix of class probabilities, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMatrix(Matrix);

impl ProbabilityMatrix {
    pub const ROW_TOLERANCE: f64 = 1e-6;

    pub fn new(m: Matrix) -> Result<Self> {
        for (i, row) in m.iter_rows().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > Self::ROW_TOLERANCE {
                return Err(Error::InvalidData(format!(
                    "probability row {i} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(Self(m))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn classes(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.0.get(i, c)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    /// Argmax per row; ties go to the lowest class index.
    pub fn argmax_rows(&self) -> Vec<usize> {
        self.0
            .iter_rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
                    )
                    .0
            })
            .collect()
    }
}

/// Non-negative fusion weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleWeights(Vec<f64>);

impl EnsembleWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidData(format!("weights {w:?} are not on the simplex")));
        }
        Ok(Self(w))
    }

    /// Normalize non-negative values so they sum to one.
    pub fn normalized(w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        if !(sum > 0.0) || w.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidData(format!("cannot normalize weights {w:?}")));
        }
        Self::new(w.iter().map(|v| v / sum).collect())
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// Softmax of unconstrained logits.
    pub fn from_logits(v: &[f64]) -> Self {
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
        let s: f64 = e.iter().sum();
        Self(e.into_iter().map(|x| x / s).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weighted sum of probability rows and its argmax labels.
pub fn fuse(probs: &[ProbabilityMatrix], w: &EnsembleWeights) -> Result<(ProbabilityMatrix, Vec<usize>)> {
    let first = probs
        .first()
        .ok_or_else(|| Error::InvalidData("no probability matrices to fuse".into()))?;
    if probs.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            actual: w.len(),
        });
    }
    let (n, k) = (first.rows(), first.classes());
    if let Some(p) = probs.iter().find(|p| p.rows() != n || p.classes() != k) {
        return Err(Error::InvalidData(format!(
            "shape mismatch: {}x{} vs {}x{}",
            p.rows(),
            p.classes(),
            n,
            k
        )));
    }
    let mut out = vec![0.0; n * k];
    for (p, &wi) in probs.iter().zip(w.as_slice()) {
        for (o, v) in out.iter_mut().zip(p.as_matrix().as_slice()) {
            *o += wi * v;
        }
    }
    let fused = ProbabilityMatrix(Matrix::from_vec(n, k, out)?);
    let labels = fused.argmax_rows();
    Ok((fused, labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightFit {
    pub weights: EnsembleWeights,
    /// Weighted F1 of the fused predictions at `weights`.
    pub objective: f64,
    pub uniform_objective: f64,
    pub evaluations: usize,
}

/// Fusion weights maximising weighted F1 of the fused predictions.
///
/// Nelder–Mead runs over softmax logits from the uniform point. Because
/// weighted F1 is piecewise constant, the search is restarted from logits
/// favouring each single model; the best vertex over all runs wins and the
/// uniform start is visited first, so ties resolve to it.
pub fn optimize_weights(oof: &[ProbabilityMatrix], y_true: &[usize]) -> Result<WeightFit> {
    let m = oof.len();
    if m < 1 {
        return Err(Error::InvalidData("need at least one model".into()));
    }
    let k = oof[0].classes();
    if oof[0].rows() != y_true.len() {
        return Err(Error::DimensionMismatch {
            expected: oof[0].rows(),
            actual: y_true.len(),
        });
    }
    let score = |w: &EnsembleWeights| -> Result<f64> {
        let (_, labels) = fuse(oof, w)?;
        Ok(weighted_f1(y_true, &labels, k))
    };
    let uniform = EnsembleWeights::uniform(m);
    let uniform_objective = score(&uniform)?;
    if m == 1 {
        return Ok(WeightFit {
            weights: EnsembleWeights(vec![1.0]),
            objective: uniform_objective,
            uniform_objective,
            evaluations: 1,
        });
    }
    let objective = |v: &[f64]| -> f64 {
        match score(&EnsembleWeights::from_logits(v)) {
            Ok(f1) => -f1,
            Err(_) => f64::INFINITY,
        }
    };
    let mut starts = vec![vec![0.0; m]];
    for i in 0..m {
        for s in RESTART_LOGITS {
            let mut v = vec![0.0; m];
            v[i] = s;
            starts.push(v);
        }
    }
    let params = NelderMeadParams::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0;
    for x0 in &starts {
        let r = nelder_mead(objective, x0, &params)?;
        evaluations += r.evaluations;
        if best.as_ref().is_none_or(|(_, f)| r.fx < *f) {
            best = Some((r.x, r.fx));
        }
    }
    let (v, fx) = best.expect("at least one start");
    Ok(WeightFit {
        weights: EnsembleWeights::from_logits(&v),
        objective: -fx,
        uniform_objective,
        evaluations,
    })
}

/// Logit offsets for the single-model restarts.
const RESTART_LOGITS: [f64; 3] = [1.0, 2.0, 4.0];

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(rows: &[[f64; 3]]) -> ProbabilityMatrix {
        ProbabilityMatrix::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn degenerate_weights_copy_model() {
        let a = pm(&[[0.6, 0.3, 0.1], [0.1, 0.1, 0.8]]);
        let b = pm(&[[0.2, 0.5, 0.3], [0.3, 0.4, 0.3]]);
        let (f, _) = fuse(&[a.clone(), b], &EnsembleWeights::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(f, a);
    }

    #[test]
    fn arithmetic_example() {
        let a = pm(&[[0.6, 0.3, 0.1]]);
        let b = pm(&[[0.2, 0.5, 0.3]]);
        let (f, labels) = fuse(&[a, b], &EnsembleWeights::new(vec![0.7, 0.3]).unwrap()).unwrap();
        for (got, want) in f.row(0).iter().zip([0.48, 0.36, 0.16]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(labels, vec![0]);
    }

    #[test]
    fn identical_inputs_fixed_point() {
        let a = pm(&[[0.2, 0.2, 0.6], [0.5, 0.25, 0.25]]);
        for w in [0.1, 0.5, 0.9] {
            let (f, _) = fuse(
                &[a.clone(), a.clone()],
                &EnsembleWeights::new(vec![w, 1.0 - w]).unwrap(),
            )
            .unwrap();
            for (x, y) in f.as_matrix().as_slice().iter().zip(a.as_matrix().as_slice()) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_class() {
        let a = pm(&[[0.4, 0.4, 0.2]]);
        assert_eq!(a.argmax_rows(), vec![0]);
    }

    #[test]
    fn shape_mismatch() {
        let a = pm(&[[0.4, 0.4, 0.2]]);
        let b = pm(&[[0.4, 0.4, 0.2], [0.4, 0.4, 0.2]]);
        assert!(fuse(&[a.clone(), b], &EnsembleWeights::uniform(2)).is_err());
        assert!(fuse(&[a], &EnsembleWeights::uniform(2)).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(EnsembleWeights::new(vec![0.5, 0.6]).is_err());
        assert!(EnsembleWeights::new(vec![-0.1, 1.1]).is_err());
        let w = EnsembleWeights::from_logits(&[0.0, 0.0, 0.0]);
        assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singleton_model() {
        let a = pm(&[[0.6, 0.3, 0.1], [0.1, 0.8, 0.1]]);
        let fit = optimize_weights(&[a], &[0, 1]).unwrap();
        assert_eq!(fit.weights.as_slice(), &[1.0]);
        assert_eq!(fit.objective, 1.0);
    }

    /// Model A is always right with low confidence; model B is
    /// confidently wrong with varying strength, so the fused prediction is
    /// perfect only once A's weight exceeds 0.9.
    #[test]
    fn perfect_model_dominates_adversary() {
        let n = 30;
        let mut y = Vec::new();
        let (mut a_rows, mut b_rows) = (Vec::new(), Vec::new());
        for i in 0..n {
            let c = i % 3;
            let wrong = (c + 1) % 3;
            let mut a = [0.3; 3];
            a[c] = 0.4;
            // B's confidence on the wrong class rises from 0.5 to ~0.95.
            let conf = 0.5 + 0.45 * i as f64 / (n - 1) as f64;
            let mut b = [(1.0 - conf) / 2.0; 3];
            b[wrong] = conf;
            y.push(c);
            a_rows.push(a);
            b_rows.push(b);
        }
        // The hardest sample is right only when 0.1 w > 0.925 (1 - w), i.e. w > 0.902.
        let (a, b) = (pm(&a_rows), pm(&b_rows));
        let fit = optimize_weights(&[a.clone(), b.clone()], &y).unwrap();
        assert!(fit.weights.as_slice()[0] > 0.9, "{:?}", fit.weights);
        assert_eq!(fit.objective, 1.0);
        assert!(fit.objective >= fit.uniform_objective);
        let (_, labels) = fuse(&[a, b], &fit.weights).unwrap();
        assert_eq!(labels, y);
    }
}
