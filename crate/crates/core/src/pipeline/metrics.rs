use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// Precision had no predictions to divide by and was set to 0.
    pub precision_undefined: bool,
    /// Recall had no support to divide by and was set to 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[true][pred]` counts.
    pub confusion: Vec<Vec<usize>>,
    /// Rows divided by their support; empty classes keep an all-zero row.
    pub confusion_normalized: Vec<Vec<f64>>,
}

impl MetricsReport {
    /// Confusion matrix as CSV with a `true\pred` header.
    pub fn confusion_csv(&self, names: &[&str], normalized: bool) -> String {
        let mut s = String::from("true\\pred");
        for n in names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (i, n) in names.iter().enumerate() {
            s.push_str(n);
            for j in 0..names.len() {
                if normalized {
                    s.push_str(&format!(",{:.6}", self.confusion_normalized[i][j]));
                } else {
                    s.push_str(&format!(",{}", self.confusion[i][j]));
                }
            }
            s.push('\n');
        }
        s
    }
}

fn confusion(y_true: &[usize], y_pred: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        m[t][p] += 1;
    }
    m
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

fn class_metrics(m: &[Vec<usize>], c: usize) -> ClassMetrics {
    let tp = m[c][c];
    let predicted: usize = m.iter().map(|r| r[c]).sum();
    let support: usize = m[c].iter().sum();
    let (precision, precision_undefined) = ratio(tp, predicted);
    let (recall, recall_undefined) = ratio(tp, support);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support,
        precision_undefined,
        recall_undefined,
    }
}

fn check(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<()> {
    if y_true.is_empty() {
        return Err(Error::InvalidData("no labels to score".into()));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if let Some(c) = y_true.iter().chain(y_pred).find(|&&c| c >= k) {
        return Err(Error::InvalidData(format!("label {c} out of range for {k} classes")));
    }
    Ok(())
}

/// Accuracy, per-class and averaged precision/recall/F1, and confusion
/// matrices. Undefined ratios count as 0 and are flagged per class.
pub fn compute_metrics(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<MetricsReport> {
    check(y_true, y_pred, n_classes)?;
    let n = y_true.len() as f64;
    let m = confusion(y_true, y_pred, n_classes);
    let per_class: Vec<ClassMetrics> = (0..n_classes).map(|c| class_metrics(&m, c)).collect();
    let weighted = |f: fn(&ClassMetrics) -> f64| -> f64 { per_class.iter().map(|c| c.support as f64 / n * f(c)).sum() };
    let trace: usize = (0..n_classes).map(|c| m[c][c]).sum();
    let confusion_normalized = m
        .iter()
        .map(|row| {
            let s: usize = row.iter().sum();
            row.iter()
                .map(|&v| if s == 0 { 0.0 } else { v as f64 / s as f64 })
                .collect()
        })
        .collect();
    Ok(MetricsReport {
        accuracy: trace as f64 / n,
        weighted_precision: weighted(|c| c.precision),
        weighted_recall: weighted(|c| c.recall),
        weighted_f1: weighted(|c| c.f1),
        macro_f1: per_class.iter().map(|c| c.f1).sum::<f64>() / n_classes as f64,
        per_class,
        confusion: m,
        confusion_normalized,
    })
}

/// Support-weighted F1, the fitness and fusion objective. Returns 0 for
/// empty or malformed input.
pub fn weighted_f1(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> f64 {
    compute_metrics(y_true, y_pred, n_classes)
        .map(|r| r.weighted_f1)
        .unwrap_or(0.0)
}
