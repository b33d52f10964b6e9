use serde::{Deserialize, Serialize};

use super::anova::anova_table;
use crate::error::{Error, Result};
use crate::gbdt::TreeEnsembleModel;
use crate::imaging::FEATURE_NAMES;
use crate::pipeline::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRank {
    pub feature: usize,
    pub name: String,
    pub f: f64,
    pub p_value: f64,
    /// Cumulative split gain when a boosted model is supplied.
    pub gain: Option<f64>,
}

/// Features ordered by ANOVA F (descending, ties by index), with the
/// model's gain importance alongside.
pub fn rank_features(ds: &Dataset, model: Option<&TreeEnsembleModel>) -> Result<Vec<FeatureRank>> {
    if let Some(m) = model {
        if m.n_features != ds.x.cols() {
            return Err(Error::DimensionMismatch {
                expected: ds.x.cols(),
                actual: m.n_features,
            });
        }
    }
    let mut rows: Vec<FeatureRank> = anova_table(&ds.x, &ds.y)?
        .into_iter()
        .map(|a| FeatureRank {
            feature: a.feature,
            name: FEATURE_NAMES
                .get(a.feature)
                .map_or_else(|| format!("f{:02}", a.feature + 1), |s| s.to_string()),
            f: a.f,
            p_value: a.p_value,
            gain: model.map(|m| m.feature_gains[a.feature]),
        })
        .collect();
    rows.sort_by(|a, b| b.f.total_cmp(&a.f).then(a.feature.cmp(&b.feature)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::{self, feature_importance, GbdtConfig};
    use crate::matrix::Matrix;
    use crate::{seed, N_FEATURES};
    use rand_distr::{Distribution, StandardNormal};

    fn single_signal(n: usize, dup: bool) -> Dataset {
        let mut rng = seed::rng(1, "single-signal", &[]);
        let mut data = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 3;
            let mut row: Vec<f64> = (0..N_FEATURES).map(|_| StandardNormal.sample(&mut rng)).collect();
            row[15] += 3.0 * c as f64;
            if dup {
                row[3] = row[15];
            }
            data.extend(row);
            y.push(c);
        }
        let ids = (0..n).map(|i| i.to_string()).collect();
        Dataset::new(Matrix::from_vec(n, N_FEATURES, data).unwrap(), y, ids).unwrap()
    }

    #[test]
    fn single_signal_tops_both_columns() {
        let ds = single_signal(150, false);
        let model = gbdt::fit(
            &ds.x,
            &ds.y,
            &GbdtConfig {
                n_estimators: 30,
                ..GbdtConfig::default()
            },
        )
        .unwrap();
        let table = rank_features(&ds, Some(&model)).unwrap();
        assert_eq!(table[0].feature, 15);
        assert_eq!(table[0].name, "percentage_dense_area");
        assert_eq!(feature_importance(&model)[0].0, 15);
        assert!(table.windows(2).all(|w| w[0].f >= w[1].f));
    }

    #[test]
    fn duplicate_column_ranks_adjacent() {
        let ds = single_signal(90, true);
        let table = rank_features(&ds, None).unwrap();
        assert_eq!((table[0].feature, table[1].feature), (3, 15));
        assert_eq!(table[0].f, table[1].f);
        assert!(table[0].gain.is_none());
    }
}
