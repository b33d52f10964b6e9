use serde::{Deserialize, Serialize};

/// Maximum number of histogram bins per feature.
pub const MAX_BINS: usize = 255;

/// Per-feature bin boundaries. A value `v` falls in the first bin whose
/// upper bound is `>= v`; the last bin is unbounded above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub upper_bounds: Vec<f64>,
}

impl BinMapper {
    /// Boundaries from the training values of one feature.
    ///
    /// With at most [`MAX_BINS`] distinct values every value gets its own bin
    /// and boundaries sit midway between neighbours, so histogram splits see
    /// every threshold an exhaustive search would.
    pub fn fit(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        let mid = |a: f64, b: f64| a + (b - a) / 2.0;
        let upper_bounds = if distinct.len() <= MAX_BINS {
            distinct.windows(2).map(|w| mid(w[0], w[1])).collect()
        } else {
            let n = sorted.len();
            let mut bounds: Vec<f64> = (1..MAX_BINS)
                .filter_map(|j| {
                    let pos = j * n / MAX_BINS;
                    (pos > 0 && pos < n && sorted[pos - 1] < sorted[pos]).then(|| mid(sorted[pos - 1], sorted[pos]))
                })
                .collect();
            bounds.dedup();
            bounds
        };
        Self { upper_bounds }
    }

    pub fn n_bins(&self) -> usize {
        self.upper_bounds.len() + 1
    }

    #[inline]
    pub fn bin(&self, v: f64) -> u8 {
        self.upper_bounds.partition_point(|&u| u < v) as u8
    }
}
