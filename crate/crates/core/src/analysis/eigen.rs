use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order and
/// eigenvectors as the matching columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    if !a.all_finite() {
        return Err(Error::InvalidData("non-finite matrix entry".into()));
    }
    for i in 0..n {
        for j in 0..i {
            let (x, y) = (a.get(i, j), a.get(j, i));
            if (x - y).abs() > 1e-9 * x.abs().max(y.abs()).max(1.0) {
                return Err(Error::InvalidData("matrix is not symmetric".into()));
            }
        }
    }
    let mut m = a.clone();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.set(i, i, 1.0);
    }
    let total: f64 = m.as_slice().iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) * m.get(i, j))
            .sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                for k in 0..n {
                    let (vkp, vkq) = (v.get(k, p), v.get(k, q));
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(j, j).total_cmp(&m.get(i, i)).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, v.get(r, src));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Roots of the characteristic polynomial of a symmetric 2x2 matrix.
    fn roots2(a: f64, b: f64, d: f64) -> [f64; 2] {
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
        [(tr + disc) / 2.0, (tr - disc) / 2.0]
    }

    /// Roots of `det(A - x I)` for a symmetric 3x3 matrix via the
    /// trigonometric solution of the depressed cubic.
    fn roots3(m: &[[f64; 3]; 3]) -> [f64; 3] {
        let tr = m[0][0] + m[1][1] + m[2][2];
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        // x^3 - tr x^2 + minors x - det = 0, substitute x = t + tr/3.
        let p = minors - tr * tr / 3.0;
        let q = -2.0 * tr.powi(3) / 27.0 + tr * minors / 3.0 - det;
        let shift = tr / 3.0;
        if p.abs() < 1e-14 {
            let t = (-q).cbrt();
            return [t + shift; 3];
        }
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift;
        }
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    fn check_pairs(a: &Matrix, e: &SymmetricEigen) {
        let n = a.rows();
        for k in 0..n {
            let v = e.vector(k);
            let norm: f64 = v.iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-10);
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a.get(i, j) * v[j]).sum();
                assert!((av - e.values[k] * v[i]).abs() < 1e-9 * e.values[0].abs().max(1.0));
            }
        }
    }

    #[test]
    fn diagonal_and_rejections() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 3.0]]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!(symmetric_eigen(&Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap()).is_err());
        assert!(symmetric_eigen(&Matrix::zeros(2, 3)).is_err());
    }

    proptest! {
        #[test]
        fn two_by_two_matches_polynomial(a in -10.0f64..10.0, b in -10.0f64..10.0, d in -10.0f64..10.0) {
            let m = Matrix::from_rows(&[[a, b], [b, d]]).unwrap();
            let e = symmetric_eigen(&m).unwrap();
            let want = roots2(a, b, d);
            for k in 0..2 {
                prop_assert!((e.values[k] - want[k]).abs() < 1e-9);
            }
            check_pairs(&m, &e);
        }

        #[test]
        fn three_by_three_matches_polynomial(v in prop::collection::vec(-5.0f64..5.0, 6)) {
            let m = [[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]];
            let a = Matrix::from_rows(&m).unwrap();
            let e = symmetric_eigen(&a).unwrap();
            let want = roots3(&m);
            for k in 0..3 {
                prop_assert!((e.values[k] - want[k]).abs() < 1e-6, "{:?} vs {:?}", e.values, want);
            }
            check_pairs(&a, &e);
        }
    }
}
