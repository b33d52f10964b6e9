use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seed;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Oversamples every class up to the majority count by interpolating
/// between a sample and one of its `k` nearest same-class neighbours.
/// Original rows come first, followed by synthetic rows grouped by class.
pub fn smote(x: &Matrix, y: &[usize], k: usize, seed: u64) -> Result<(Matrix, Vec<usize>)> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidConfig("SMOTE needs k >= 1".into()));
    }
    let n_classes = y.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    let target = by_class.iter().map(Vec::len).max().unwrap_or(0);

    let mut out = x.clone();
    let mut labels = y.to_vec();
    for (c, members) in by_class.iter().enumerate() {
        let need = target - members.len();
        if need == 0 || members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: c,
                count: members.len(),
                required: 2,
            });
        }
        let k_eff = k.min(members.len() - 1);
        let neighbours: Vec<Vec<usize>> = members
            .iter()
            .map(|&i| {
                let mut others: Vec<(f64, usize)> = members
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (sq_dist(x.row(i), x.row(j)), j))
                    .collect();
                others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                others.into_iter().take(k_eff).map(|(_, j)| j).collect()
            })
            .collect();

        let mut rng = seed::rng(seed, "smote", &[c as u64]);
        let mut row = vec![0.0; x.cols()];
        for _ in 0..need {
            let m = rng.random_range(0..members.len());
            let base = x.row(members[m]);
            let nn = x.row(neighbours[m][rng.random_range(0..k_eff)]);
            let u: f64 = rng.random();
            for (r, (a, b)) in row.iter_mut().zip(base.iter().zip(nn)) {
                *r = a + u * (b - a);
            }
            out.push_row(&row)?;
            labels.push(c);
        }
    }
    Ok((out, labels))
}
