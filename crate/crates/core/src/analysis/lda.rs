use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Ridge added to the within-class scatter before whitening.
pub const LDA_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaProjection {
    /// `n x components` coordinates of the centred samples.
    pub coordinates: Matrix,
    /// Share of the between-class eigenvalue sum per component.
    pub explained_variance_ratio: Vec<f64>,
    /// `components x d` discriminant axes, unit length under the
    /// within-class scatter metric.
    pub axes: Matrix,
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let aik = a.get(i, k);
            for j in 0..b.cols() {
                out.set(i, j, out.get(i, j) + aik * b.get(k, j));
            }
        }
    }
    out
}

/// Project onto the leading discriminant directions. Requests above
/// `classes - 1` are clamped with a warning.
pub fn lda_project(x: &Matrix, y: &[usize], components: usize) -> Result<LdaProjection> {
    let (n, d) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if !x.all_finite() {
        return Err(Error::InvalidData("non-finite feature value".into()));
    }
    let k = y.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    let mut means = Matrix::zeros(k, d);
    for (i, &c) in y.iter().enumerate() {
        counts[c] += 1;
        for (m, v) in means.row_mut(c).iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    let present: Vec<usize> = (0..k).filter(|&c| counts[c] > 0).collect();
    if present.len() < 2 || n <= d {
        return Err(Error::InvalidData(format!(
            "LDA needs >= 2 classes and more samples than features, got {} classes, {n} samples",
            present.len()
        )));
    }
    for &c in &present {
        let cnt = counts[c] as f64;
        means.row_mut(c).iter_mut().for_each(|m| *m /= cnt);
    }
    let grand: Vec<f64> = (0..d).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();

    let mut sw = Matrix::zeros(d, d);
    for (i, &c) in y.iter().enumerate() {
        let diff: Vec<f64> = x.row(i).iter().zip(means.row(c)).map(|(a, b)| a - b).collect();
        for r in 0..d {
            for s in 0..d {
                sw.set(r, s, sw.get(r, s) + diff[r] * diff[s]);
            }
        }
    }
    for r in 0..d {
        sw.set(r, r, sw.get(r, r) + LDA_RIDGE);
    }
    let mut sb = Matrix::zeros(d, d);
    for &c in &present {
        let diff: Vec<f64> = means.row(c).iter().zip(&grand).map(|(a, b)| a - b).collect();
        for r in 0..d {
            for s in 0..d {
                sb.set(r, s, sb.get(r, s) + counts[c] as f64 * diff[r] * diff[s]);
            }
        }
    }

    // Symmetric whitening W = V diag(1/sqrt(l)) V^T of the within scatter.
    let ew = symmetric_eigen(&sw)?;
    if ew.values.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidData("within-class scatter is singular".into()));
    }
    let mut whiten = Matrix::zeros(d, d);
    for r in 0..d {
        for s in 0..d {
            let v: f64 = (0..d)
                .map(|t| ew.vectors.get(r, t) * ew.vectors.get(s, t) / ew.values[t].sqrt())
                .sum();
            whiten.set(r, s, v);
        }
    }
    let mut m = mat_mul(&mat_mul(&whiten, &sb), &whiten);
    for r in 0..d {
        for s in 0..r {
            let avg = 0.5 * (m.get(r, s) + m.get(s, r));
            m.set(r, s, avg);
            m.set(s, r, avg);
        }
    }
    let eb = symmetric_eigen(&m)?;

    let max_components = present.len() - 1;
    let comps = if components > max_components {
        log::warn!("lda: {components} components requested, clamping to {max_components}");
        max_components
    } else {
        components.max(1)
    };
    let trace: f64 = eb.values.iter().map(|v| v.max(0.0)).sum();
    let mut axes = Matrix::zeros(comps, d);
    let mut ratios = Vec::with_capacity(comps);
    for c in 0..comps {
        let u = eb.vector(c);
        let mut a: Vec<f64> = (0..d).map(|r| (0..d).map(|s| whiten.get(r, s) * u[s]).sum()).collect();
        let lead = a
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if lead < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
        }
        axes.row_mut(c).copy_from_slice(&a);
        ratios.push(if trace > 0.0 {
            eb.values[c].max(0.0) / trace
        } else {
            0.0
        });
    }
    let mut coordinates = Matrix::zeros(n, comps);
    for i in 0..n {
        for c in 0..comps {
            let v: f64 = x
                .row(i)
                .iter()
                .zip(&grand)
                .zip(axes.row(c))
                .map(|((xv, g), a)| (xv - g) * a)
                .sum();
            coordinates.set(i, c, v);
        }
    }
    Ok(LdaProjection {
        coordinates,
        explained_variance_ratio: ratios,
        axes,
    })
}
