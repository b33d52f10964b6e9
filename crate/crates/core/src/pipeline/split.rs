use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Train/validation/test proportions of 251/34/51 specimens out of 336.
pub const DEFAULT_FRACTIONS: [f64; 3] = [251.0 / 336.0, 34.0 / 336.0, 51.0 / 336.0];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

fn members_by_class(y: &[usize]) -> Vec<Vec<usize>> {
    let k = y.iter().max().map_or(0, |m| m + 1);
    let mut by = vec![Vec::new(); k];
    for (i, &c) in y.iter().enumerate() {
        by[c].push(i);
    }
    by
}

/// Largest-remainder apportionment of `n` items over `fractions`; ties in
/// the remainder go to the earlier part.
fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Per-class proportional split into train/validation/test index sets.
pub fn stratified_split(y: &[usize], fractions: [f64; 3], seed: u64) -> Result<SplitIndices> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(*f >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split fractions {fractions:?} must sum to 1"
        )));
    }
    let mut parts = [Vec::new(), Vec::new(), Vec::new()];
    for (c, mut members) in members_by_class(y).into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let counts = apportion(members.len(), &fractions);
        if (0..3).any(|k| fractions[k] > 0.0 && counts[k] == 0) {
            let fits = |n: usize| {
                apportion(n, &fractions)
                    .iter()
                    .zip(&fractions)
                    .all(|(&m, &f)| f == 0.0 || m > 0)
            };
            let required = (members.len() + 1..)
                .find(|&n| fits(n))
                .expect("large classes always fit");
            return Err(Error::ClassTooSmall {
                class: c,
                count: members.len(),
                required,
            });
        }
        members.shuffle(&mut seed::rng(seed, "split", &[c as u64]));
        let mut start = 0;
        for (part, &n) in parts.iter_mut().zip(&counts) {
            part.extend_from_slice(&members[start..start + n]);
            start += n;
        }
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(SplitIndices { train, val, test })
}

/// Stratified K-fold partition. Each class is shuffled, classes are laid
/// end to end, and positions are dealt to folds round-robin, so every fold
/// holds within one sample of each class's share.
pub fn stratified_kfold(y: &[usize], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let mut order = Vec::with_capacity(y.len());
    for (c, mut members) in members_by_class(y).into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                class: c,
                count: members.len(),
                required: k,
            });
        }
        members.shuffle(&mut seed::rng(seed, "kfold", &[c as u64]));
        order.extend(members);
    }
    let mut assignment = vec![0; y.len()];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % k;
    }
    Ok((0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) = (0..y.len()).partition(|&i| assignment[i] == f);
            Fold { train, val }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::class_counts;
    use proptest::prelude::*;

    fn labels(counts: &[usize]) -> Vec<usize> {
        counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect()
    }

    #[test]
    fn reported_test_composition() {
        let y = labels(&[85, 182, 69]);
        let s = stratified_split(&y, [0.747, 0.101, 0.152], 1).unwrap();
        let test: Vec<usize> = s.test.iter().map(|&i| y[i]).collect();
        assert_eq!(class_counts(&test, 3), vec![13, 28, 10]);
        assert_eq!(s.train.len() + s.val.len() + s.test.len(), y.len());
    }

    #[test]
    fn all_train() {
        let y = labels(&[3, 4, 5]);
        let s = stratified_split(&y, [1.0, 0.0, 0.0], 9).unwrap();
        assert_eq!(s.train, (0..12).collect::<Vec<_>>());
        assert!(s.val.is_empty() && s.test.is_empty());
    }

    #[test]
    fn split_errors() {
        let y = labels(&[2, 10, 10]);
        assert!(matches!(
            stratified_split(&y, DEFAULT_FRACTIONS, 0),
            Err(Error::ClassTooSmall { class: 0, .. })
        ));
        assert!(stratified_split(&y, [0.5, 0.5, 0.5], 0).is_err());
    }

    #[test]
    fn kfold_divisible() {
        let y = labels(&[5, 5, 5]);
        for f in stratified_kfold(&y, 5, 3).unwrap() {
            let v: Vec<usize> = f.val.iter().map(|&i| y[i]).collect();
            assert_eq!(class_counts(&v, 3), vec![1, 1, 1]);
        }
    }

    #[test]
    fn kfold_development_set_sizes() {
        let y = labels(&[63, 135, 52]);
        for f in stratified_kfold(&y, 5, 11).unwrap() {
            assert!(f.val.len().abs_diff(50) <= 1);
        }
    }

    #[test]
    fn kfold_too_small_class() {
        let y = labels(&[10, 2, 10]);
        assert!(matches!(
            stratified_kfold(&y, 3, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                count: 2,
                required: 3
            })
        ));
    }

    proptest! {
        #[test]
        fn split_partitions(a in 5usize..40, b in 5usize..40, c in 5usize..40, seed: u64) {
            let y = labels(&[a, b, c]);
            let s = stratified_split(&y, [0.6, 0.2, 0.2], seed).unwrap();
            let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            prop_assert_eq!(s.clone(), stratified_split(&y, [0.6, 0.2, 0.2], seed).unwrap());
        }

        #[test]
        fn kfold_partitions(a in 5usize..40, b in 5usize..40, c in 5usize..40, k in 2usize..6, seed: u64) {
            let y = labels(&[a, b, c]);
            let folds = stratified_kfold(&y, k, seed).unwrap();
            let mut seen = vec![0; y.len()];
            for f in &folds {
                prop_assert_eq!(f.train.len() + f.val.len(), y.len());
                prop_assert!(f.val.iter().all(|i| f.train.binary_search(i).is_err()));
                for &i in &f.val {
                    seen[i] += 1;
                }
                let v: Vec<usize> = f.val.iter().map(|&i| y[i]).collect();
                for (cls, &n) in class_counts(&v, 3).iter().enumerate() {
                    let share = [a, b, c][cls] as f64 / k as f64;
                    prop_assert!((n as f64 - share).abs() < 1.0);
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
        }
    }
}
