use super::{smote, weighted_f1, Fold};
use crate::error::{Error, Result};
use crate::fusion::ProbabilityMatrix;
use crate::matrix::Matrix;
use crate::seed;

/// Out-of-fold probabilities assembled in original row order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutOfFold {
    pub probs: ProbabilityMatrix,
    /// Validation fold of each row.
    pub fold_of: Vec<usize>,
    /// Weighted F1 on each validation fold.
    pub fold_scores: Vec<f64>,
}

impl OutOfFold {
    /// Mean per-fold weighted F1, the cross-validated fitness.
    pub fn mean_score(&self) -> f64 {
        self.fold_scores.iter().sum::<f64>() / self.fold_scores.len() as f64
    }
}

/// Cross-validated predictions. Each training fold is SMOTE-balanced
/// (when `smote_k` is set) before `fit_predict(train_x, train_y, val_x,
/// fold)` is called; validation rows are always original samples.
pub fn cross_val_predict<F>(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    folds: &[Fold],
    smote_k: Option<usize>,
    seed: u64,
    fit_predict: F,
) -> Result<OutOfFold>
where
    F: Fn(&Matrix, &[usize], &Matrix, usize) -> Result<ProbabilityMatrix>,
{
    let n = y.len();
    let mut data = vec![f64::NAN; n * n_classes];
    let mut fold_of = vec![usize::MAX; n];
    let mut fold_scores = Vec::with_capacity(folds.len());
    for (f, fold) in folds.iter().enumerate() {
        let tx = x.select_rows(&fold.train);
        let ty: Vec<usize> = fold.train.iter().map(|&i| y[i]).collect();
        let (tx, ty) = match smote_k {
            Some(k) => smote(&tx, &ty, k, seed::derive(seed, "cv-smote", &[f as u64]))?,
            None => (tx, ty),
        };
        let vx = x.select_rows(&fold.val);
        let p = fit_predict(&tx, &ty, &vx, f)?;
        if p.rows() != fold.val.len() || p.classes() != n_classes {
            return Err(Error::DimensionMismatch {
                expected: fold.val.len() * n_classes,
                actual: p.rows() * p.classes(),
            });
        }
        let vy: Vec<usize> = fold.val.iter().map(|&i| y[i]).collect();
        fold_scores.push(weighted_f1(&vy, &p.argmax_rows(), n_classes));
        for (r, &i) in fold.val.iter().enumerate() {
            if fold_of[i] != usize::MAX {
                return Err(Error::InvalidData(format!("row {i} validated twice")));
            }
            fold_of[i] = f;
            data[i * n_classes..(i + 1) * n_classes].copy_from_slice(p.row(r));
        }
    }
    if let Some(i) = fold_of.iter().position(|&f| f == usize::MAX) {
        return Err(Error::InvalidData(format!("row {i} is in no validation fold")));
    }
    Ok(OutOfFold {
        probs: ProbabilityMatrix::new(Matrix::from_vec(n, n_classes, data)?)?,
        fold_of,
        fold_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{stratified_kfold, synthesize_dataset};
    use std::cell::RefCell;

    #[test]
    fn oof_covers_original_rows_only() {
        let ds = synthesize_dataset(12, 2.0, 1).unwrap();
        // Drop some rows of class 2 so SMOTE has work to do.
        let keep: Vec<usize> = (0..ds.len()).filter(|&i| !(ds.y[i] == 2 && i % 3 == 0)).collect();
        let ds = ds.subset(&keep);
        let folds = stratified_kfold(&ds.y, 3, 4).unwrap();
        let train_sizes = RefCell::new(Vec::new());
        let oof = cross_val_predict(&ds.x, &ds.y, 3, &folds, Some(5), 0, |tx, ty, vx, _| {
            assert_eq!(tx.rows(), ty.len());
            train_sizes.borrow_mut().push(ty.len());
            let uniform = vec![1.0 / 3.0; vx.rows() * 3];
            ProbabilityMatrix::new(Matrix::from_vec(vx.rows(), 3, uniform)?)
        })
        .unwrap();
        assert_eq!(oof.probs.rows(), ds.len());
        let mut val: Vec<usize> = folds.iter().flat_map(|f| f.val.clone()).collect();
        val.sort_unstable();
        assert_eq!(val, (0..ds.len()).collect::<Vec<_>>());
        for (f, fold) in folds.iter().enumerate() {
            assert!(train_sizes.borrow()[f] > fold.train.len());
            assert!(fold.val.iter().all(|&i| oof.fold_of[i] == f));
        }
    }
}
