//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Columns of the working matrix are rotated pairwise in a fixed cyclic order
//! until every pair is orthogonal to within `EPSILON·√rows` relative to the
//! pair's norms. The fixed order makes results bit-reproducible for a given
//! input. One-sided Jacobi also computes small singular values to high
//! relative accuracy, which matters for the graded truncations this crate
//! works with (singular values spanning 10+ orders of magnitude).

use super::qr::complete_orthonormal;
use super::{DenseMatrix, LinalgError};

/// Sweep cap. Typical inputs converge in 6 to 12 sweeps.
pub const MAX_SWEEPS: usize = 60;

/// Columns whose norm (after rescaling the input to unit max-entry) falls
/// below this are treated as exact zeros and get completed basis vectors.
const NEGLIGIBLE_COLUMN: f64 = 1e-150;
/// Such columns are also never rotated: their squared norms reach the
/// subnormal range, where the orthogonality test cannot be met.
const NEGLIGIBLE_SQUARED: f64 = NEGLIGIBLE_COLUMN * NEGLIGIBLE_COLUMN;

/// Full singular value decomposition `A = U · diag(σ) · Vᵀ`.
///
/// `u` is `rows x rows`, `vt` is `cols x cols`, and `singular_values` has
/// `min(rows, cols)` entries in nonincreasing order.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// Number of singular values strictly above `cutoff`.
    pub fn rank_above(&self, cutoff: f64) -> usize {
        self.singular_values.iter().take_while(|&&s| s > cutoff).count()
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// `U · diag(σ) · Vᵀ` using the leading `min(rows, cols)` singular triplets.
    pub fn reconstruct(&self) -> DenseMatrix {
        let rows = self.u.rows();
        let cols = self.vt.cols();
        let k = self.singular_values.len();
        DenseMatrix::from_fn(rows, cols, |i, j| {
            (0..k)
                .map(|l| self.u.get(i, l) * self.singular_values[l] * self.vt.get(l, j))
                .sum()
        })
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult, LinalgError> {
    let (rows, cols) = a.shape();
    if rows >= cols {
        let j = Jacobi::run(a, false, true)?;
        let (left, sigma, right) = j.finish(true);
        Ok(SvdResult {
            u: left,
            singular_values: sigma,
            vt: right.expect("accumulated").transpose(),
        })
    } else {
        let j = Jacobi::run(a, true, true)?;
        let (left, sigma, right) = j.finish(true);
        // Decomposed Aᵀ = L Σ Rᵀ, so A = R Σ Lᵀ.
        Ok(SvdResult {
            u: right.expect("accumulated"),
            singular_values: sigma,
            vt: left.transpose(),
        })
    }
}

/// Singular values only, nonincreasing. Skips accumulating the rotations.
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    let (rows, cols) = a.shape();
    let j = Jacobi::run(a, rows < cols, false)?;
    Ok(j.sorted_norms().into_iter().map(|(_, s)| s).collect())
}

struct Jacobi {
    /// Working columns, column-major, `n` rows each.
    work: Vec<f64>,
    n: usize,
    k: usize,
    /// Accumulated right rotations, column-major `k x k`.
    v: Option<Vec<f64>>,
    /// Power-of-two factor the input was multiplied by.
    scale: f64,
}

impl Jacobi {
    /// Runs the sweeps on `a` (or on `aᵀ` when `transpose`), which must have at
    /// least as many rows as columns after the optional transpose.
    fn run(a: &DenseMatrix, transpose: bool, accumulate: bool) -> Result<Self, LinalgError> {
        let (n, k) = if transpose {
            (a.cols(), a.rows())
        } else {
            (a.rows(), a.cols())
        };
        let max_abs = a.max_abs();
        let scale = if max_abs > 0.0 {
            2f64.powi(-max_abs.log2().ceil() as i32)
        } else {
            1.0
        };
        let mut work = vec![0.0; n * k];
        for j in 0..k {
            for i in 0..n {
                let x = if transpose { a.get(j, i) } else { a.get(i, j) };
                work[j * n + i] = x * scale;
            }
        }
        let mut v = accumulate.then(|| {
            let mut v = vec![0.0; k * k];
            for j in 0..k {
                v[j * k + j] = 1.0;
            }
            v
        });

        let tol = f64::EPSILON * (n.max(1) as f64).sqrt();
        // A computed γ below the rounding bound of its own dot product is zero.
        let noise = f64::EPSILON * n.max(1) as f64;
        for _sweep in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..k {
                for q in p + 1..k {
                    let (head, tail) = work.split_at_mut(q * n);
                    let cp = &mut head[p * n..(p + 1) * n];
                    let cq = &mut tail[..n];
                    let alpha = dot(cp, cp);
                    let beta = dot(cq, cq);
                    if alpha <= NEGLIGIBLE_SQUARED || beta <= NEGLIGIBLE_SQUARED {
                        continue;
                    }
                    let gamma = dot(cp, cq);
                    if gamma == 0.0
                        || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt()
                        || gamma.abs() <= noise * abs_dot(cp, cq)
                    {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                    let c = 1.0 / t.hypot(1.0);
                    let s = c * t;
                    rotate(cp, cq, c, s);
                    if let Some(v) = v.as_mut() {
                        let (vh, vt) = v.split_at_mut(q * k);
                        rotate(&mut vh[p * k..(p + 1) * k], &mut vt[..k], c, s);
                    }
                }
            }
            if !rotated {
                return Ok(Self {
                    work,
                    n,
                    k,
                    v,
                    scale,
                });
            }
        }
        Err(LinalgError::SvdNoConvergence { sweeps: MAX_SWEEPS })
    }

    /// `(column index, σ)` sorted by σ descending, ties by index.
    fn sorted_norms(&self) -> Vec<(usize, f64)> {
        let mut norms: Vec<(usize, f64)> = (0..self.k)
            .map(|j| {
                let c = &self.work[j * self.n..(j + 1) * self.n];
                (j, dot(c, c).sqrt())
            })
            .collect();
        norms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        norms
            .into_iter()
            .map(|(j, s)| (j, s / self.scale))
            .collect()
    }

    /// Returns `(left n x n, σ, right k x k)` for the decomposed matrix.
    fn finish(self, full_left: bool) -> (DenseMatrix, Vec<f64>, Option<DenseMatrix>) {
        let order = self.sorted_norms();
        let (n, k) = (self.n, self.k);
        let sigma: Vec<f64> = order.iter().map(|&(_, s)| s).collect();

        let valid: Vec<bool> = order
            .iter()
            .map(|&(_, s)| s * self.scale > NEGLIGIBLE_COLUMN)
            .collect();
        let n_valid = valid.iter().filter(|&&b| b).count();
        let mut kept = DenseMatrix::zeros(n, n_valid);
        let mut col = 0;
        for (slot, &(j, s)) in order.iter().enumerate() {
            if !valid[slot] {
                continue;
            }
            let scaled = s * self.scale;
            for i in 0..n {
                kept.set(i, col, self.work[j * n + i] / scaled);
            }
            col += 1;
        }

        let width = if full_left { n } else { k };
        let completed = complete_orthonormal(&kept);
        let mut left = DenseMatrix::zeros(n, width);
        let mut next_valid = 0;
        let mut next_extra = n_valid;
        for slot in 0..width {
            let src = if valid.get(slot).copied().unwrap_or(false) {
                next_valid += 1;
                next_valid - 1
            } else {
                next_extra += 1;
                next_extra - 1
            };
            for i in 0..n {
                left.set(i, slot, completed.get(i, src));
            }
        }

        let right = self.v.map(|v| {
            DenseMatrix::from_fn(k, k, |i, slot| {
                let j = order[slot].0;
                v[j * k + i]
            })
        });
        (left, sigma, right)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn abs_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y).abs()).sum()
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}
