//! Householder QR.

use super::DenseMatrix;

/// Householder QR of an `m x n` matrix.
///
/// Returns the full `m x m` orthogonal factor and the `m x n` upper-trapezoidal
/// factor, with the diagonal of R made nonnegative by flipping the matching
/// columns of Q.
pub fn householder_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n.min(m));

    for k in 0..n.min(m) {
        let norm: f64 = (k..m).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
        let mut v: Vec<f64> = (k..m).map(|i| r.get(i, k)).collect();
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * r.get(i, j)).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                let val = r.get(i, j) - f * v[i - k];
                r.set(i, j, val);
            }
        }
        for i in k + 1..m {
            r.set(i, k, 0.0);
        }
        let scale = vnorm2.sqrt();
        reflectors.push(v.into_iter().map(|x| x / scale).collect());
    }

    // Q = H_0 H_1 ... H_{p-1}, accumulated right to left on the identity.
    let mut q = DenseMatrix::identity(m);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if v.is_empty() {
            continue;
        }
        for j in 0..m {
            let dot: f64 = (k..m).map(|i| v[i - k] * q.get(i, j)).sum();
            if dot == 0.0 {
                continue;
            }
            for i in k..m {
                let val = q.get(i, j) - 2.0 * dot * v[i - k];
                q.set(i, j, val);
            }
        }
    }

    for k in 0..n.min(m) {
        if r.get(k, k) < 0.0 {
            for j in k..n {
                r.set(k, j, -r.get(k, j));
            }
            for i in 0..m {
                q.set(i, k, -q.get(i, k));
            }
        }
    }
    (q, r)
}

/// Extends the orthonormal columns of `basis` (`m x k`) to an orthonormal basis
/// of the whole space. The first `k` columns of the result are `basis` itself.
pub fn complete_orthonormal(basis: &DenseMatrix) -> DenseMatrix {
    let (m, k) = basis.shape();
    let (q, _) = householder_qr(basis);
    DenseMatrix::from_fn(m, m, |i, j| if j < k { basis.get(i, j) } else { q.get(i, j) })
}
