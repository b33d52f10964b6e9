use serde::{Deserialize, Serialize};

use super::special::f_survival;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub feature: usize,
    /// `+inf` when groups differ but have no spread.
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

/// One-way ANOVA of `column` grouped by label. Empty label values are
/// ignored, so the group count is the number of distinct labels.
pub fn anova_f(column: &[f64], y: &[usize]) -> Result<AnovaResult> {
    if column.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: column.len(),
            actual: y.len(),
        });
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("non-finite value in ANOVA column".into()));
    }
    let k = y.iter().max().map_or(0, |m| m + 1);
    let (mut sums, mut counts) = (vec![0.0; k], vec![0usize; k]);
    for (&v, &c) in column.iter().zip(y) {
        sums[c] += v;
        counts[c] += 1;
    }
    let groups = counts.iter().filter(|&&n| n > 0).count();
    let n = column.len();
    if groups < 2 || n <= groups {
        return Err(Error::InvalidData(format!(
            "ANOVA needs >= 2 groups and more samples than groups, got {groups} groups of {n}"
        )));
    }
    let grand = column.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let ssb: f64 = means
        .iter()
        .zip(&counts)
        .map(|(m, &c)| c as f64 * (m - grand) * (m - grand))
        .sum();
    let ssw: f64 = column
        .iter()
        .zip(y)
        .map(|(v, &c)| (v - means[c]) * (v - means[c]))
        .sum();
    let (df_between, df_within) = (groups - 1, n - groups);

    let scale = column.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let negligible = |ss: f64| ss <= 1e-24 * scale.max(f64::MIN_POSITIVE) * n as f64;
    let (f, p_value) = if negligible(ssw) {
        if negligible(ssb) {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = (ssb / df_between as f64) / (ssw / df_within as f64);
        (f, f_survival(f, df_between as f64, df_within as f64))
    };
    Ok(AnovaResult {
        feature: 0,
        f,
        df_between,
        df_within,
        p_value,
    })
}

/// [`anova_f`] for every column of `x`.
pub fn anova_table(x: &Matrix, y: &[usize]) -> Result<Vec<AnovaResult>> {
    (0..x.cols())
        .map(|j| anova_f(&x.column(j), y).map(|r| AnovaResult { feature: j, ..r }))
        .collect()
}

/// Upper-tail critical value: the `f` with `P(F > f) = alpha`.
pub fn f_critical(alpha: f64, d1: f64, d2: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while f_survival(hi, d1, d2) > alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_survival(mid, d1, d2) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn hand_example() {
        let r = anova_f(&[1.0, 2.0, 2.0, 3.0, 3.0, 4.0], &[0, 0, 1, 1, 2, 2]).unwrap();
        assert!((r.f - 4.0).abs() < 1e-12);
        assert_eq!((r.df_between, r.df_within), (2, 3));
        assert!(r.p_value > 0.0 && r.p_value < 1.0);
    }

    #[test]
    fn identical_groups_have_zero_f() {
        let r = anova_f(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0], &[0, 0, 1, 1, 2, 2]).unwrap();
        assert_eq!(r.f, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn degenerate_spreads() {
        let r = anova_f(&[1.0, 1.0, 3.0, 3.0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.f, f64::INFINITY);
        assert_eq!(r.p_value, 0.0);
        let r = anova_f(&[0.1; 5], &[0, 0, 1, 1, 1]).unwrap();
        assert_eq!((r.f, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn errors() {
        assert!(anova_f(&[1.0, 2.0], &[0, 0]).is_err());
        assert!(anova_f(&[1.0, 2.0], &[0, 1]).is_err());
        assert!(anova_f(&[1.0], &[0, 1]).is_err());
    }

    #[test]
    fn p_value_monotone_in_f() {
        for &(d1, d2) in &[(1.0, 10.0), (2.0, 3.0), (2.0, 282.0)] {
            let mut prev = 1.0;
            for i in 0..400 {
                let p = f_survival(i as f64 * 0.05, d1, d2);
                assert!(p <= prev);
                prev = p;
            }
        }
    }

    #[test]
    fn critical_value_inverts_survival() {
        let c = f_critical(0.01, 2.0, 57.0);
        assert!((f_survival(c, 2.0, 57.0) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn noise_rarely_significant() {
        let (n, reps, features) = (60, 50, 16);
        let y: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let crit = f_critical(0.01, 2.0, (n - 3) as f64);
        let mut hits = 0;
        for r in 0..reps {
            let mut rng = seed::rng(r, "anova-null", &[]);
            for _ in 0..features {
                let col: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                if anova_f(&col, &y).unwrap().f > crit {
                    hits += 1;
                }
            }
        }
        assert!((hits as f64) / ((reps * features) as f64) <= 0.05, "{hits} exceedances");
    }

    proptest! {
        #[test]
        fn invariances(values in prop::collection::vec(-100.0f64..100.0, 9..30), shift in -50.0f64..50.0, scale in 0.1f64..10.0, seed: u64) {
            let y: Vec<usize> = (0..values.len()).map(|i| i % 3).collect();
            let base = anova_f(&values, &y).unwrap();
            let moved: Vec<f64> = values.iter().map(|v| scale * v + shift).collect();
            let negated: Vec<f64> = values.iter().map(|v| -v).collect();
            for other in [moved, negated] {
                let r = anova_f(&other, &y).unwrap();
                prop_assert!((r.f - base.f).abs() <= 1e-8 * base.f.max(1.0));
            }
            use rand::seq::SliceRandom;
            let mut order: Vec<usize> = (0..values.len()).collect();
            order.shuffle(&mut seed::rng_from(seed));
            let pv: Vec<f64> = order.iter().map(|&i| values[i]).collect();
            let py: Vec<usize> = order.iter().map(|&i| y[i]).collect();
            let r = anova_f(&pv, &py).unwrap();
            prop_assert!((r.f - base.f).abs() <= 1e-9 * base.f.max(1.0));
        }
    }
}
