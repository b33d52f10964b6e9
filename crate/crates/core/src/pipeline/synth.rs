use rand_distr::{Distribution, StandardNormal};

use super::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::{seed, N_CLASSES, N_FEATURES};

/// Per-feature (mean, standard deviation) of the normal class, on the
/// scale the descriptor extractor produces.
const BASE: [(f64, f64); N_FEATURES] = [
    (0.35, 0.08),
    (0.30, 0.06),
    (0.010, 0.002),
    (0.008, 0.002),
    (0.25, 0.05),
    (4000.0, 800.0),
    (0.20, 0.03),
    (0.20, 0.03),
    (0.20, 0.03),
    (0.20, 0.03),
    (0.20, 0.03),
    (0.05, 0.01),
    (0.05, 0.01),
    (0.05, 0.01),
    (0.05, 0.01),
    (0.30, 0.08),
];

/// Columns holding fractions in [0,1].
const FRACTIONS: [usize; 7] = [4, 6, 7, 8, 9, 10, 15];

const DENSE_AREA: usize = 15;
const MEAN_LOCAL_VARIANCE: usize = 2;
const GRAD_STD: usize = 1;
const HIST_LAST: usize = 10;

/// Class mean offsets in units of standard deviation. Woody breast moves
/// along dense area and local variance; spaghetti meat moves along the
/// gradient statistics and halfway along dense area, so it overlaps both.
fn offsets(class: usize, sep: f64) -> [f64; N_FEATURES] {
    let mut o = [0.0; N_FEATURES];
    match class {
        1 => {
            o[DENSE_AREA] = sep;
            o[MEAN_LOCAL_VARIANCE] = sep;
        }
        2 => {
            o[HIST_LAST] = sep;
            o[GRAD_STD] = sep;
            o[DENSE_AREA] = sep / 2.0;
        }
        _ => {}
    }
    o
}

/// Three Gaussian clusters of `n_per_class` specimens each, labelled in
/// class order with ids `syn0000`, `syn0001`, ...
pub fn synthesize_dataset(n_per_class: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 || !(separation >= 0.0) || !separation.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "synthetic data needs n_per_class >= 1 and finite separation >= 0, got {n_per_class}, {separation}"
        )));
    }
    let mut rng = seed::rng(seed, "synth", &[]);
    let n = n_per_class * N_CLASSES;
    let mut data = Vec::with_capacity(n * N_FEATURES);
    let mut y = Vec::with_capacity(n);
    for c in 0..N_CLASSES {
        let off = offsets(c, separation);
        for _ in 0..n_per_class {
            for j in 0..N_FEATURES {
                let z: f64 = StandardNormal.sample(&mut rng);
                let (mean, sd) = BASE[j];
                let mut v = mean + sd * (off[j] + z);
                if FRACTIONS.contains(&j) {
                    v = v.clamp(0.0, 1.0);
                }
                data.push(v);
            }
            y.push(c);
        }
    }
    let ids = (0..n).map(|i| format!("syn{i:04}")).collect();
    Dataset::new(Matrix::from_vec(n, N_FEATURES, data)?, y, ids)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{self, GbdtConfig};

    fn class_mean(ds: &Dataset, c: usize, j: usize) -> f64 {
        let v: Vec<f64> = (0..ds.len())
            .filter(|&i| ds.y[i] == c)
            .map(|i| ds.x.get(i, j))
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn zero_separation_shares_means() {
        for c in 0..N_CLASSES {
            assert_eq!(offsets(c, 0.0), [0.0; N_FEATURES]);
        }
        let ds = synthesize_dataset(2000, 0.0, 5).unwrap();
        for j in 0..N_FEATURES {
            let sd = BASE[j].1;
            let (m0, m1, m2) = (class_mean(&ds, 0, j), class_mean(&ds, 1, j), class_mean(&ds, 2, j));
            assert!(
                (m0 - m1).abs() < 0.15 * sd && (m0 - m2).abs() < 0.15 * sd,
                "feature {j}"
            );
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            synthesize_dataset(10, 2.0, 1).unwrap(),
            synthesize_dataset(10, 2.0, 1).unwrap()
        );
        assert_ne!(
            synthesize_dataset(10, 2.0, 1).unwrap(),
            synthesize_dataset(10, 2.0, 2).unwrap()
        );
    }

    #[test]
    fn fractions_clipped() {
        let ds = synthesize_dataset(300, 8.0, 3).unwrap();
        for &j in &FRACTIONS {
            assert!(ds.x.column(j).iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn well_separated_is_tree_separable() {
        let ds = synthesize_dataset(100, 6.0, 2).unwrap();
        let cfg = GbdtConfig {
            n_estimators: 1,
            max_depth: 3,
            num_leaves: 8,
            learning_rate: 1.0,
            min_child_samples: 1,
            ..GbdtConfig::default()
        };
        let model = gbdt::fit(&ds.x, &ds.y, &cfg).unwrap();
        let pred = gbdt::predict_proba(&model, &ds.x).unwrap().argmax_rows();
        let acc = pred.iter().zip(&ds.y).filter(|(a, b)| a == b).count() as f64 / ds.len() as f64;
        assert!(acc > 0.95, "accuracy {acc}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(synthesize_dataset(0, 1.0, 0).is_err());
        assert!(synthesize_dataset(5, -1.0, 0).is_err());
    }
}
