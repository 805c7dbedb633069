//! Deterministic dense linear algebra.
//!
//! Everything here is a pure function of its inputs: SVD, Moore–Penrose
//! pseudo-inverse, orthonormal bases for ranges and kernels, orthogonal
//! projectors, the gap between subspaces, canonical angles, and the norm
//! identity for oblique projectors.

mod matrix;
mod qr;
mod subspace;
mod svd;

pub use matrix::{DenseMatrix, DenseVector};
pub use qr::{complete_orthonormal, householder_qr};
pub use subspace::{
    canonical_angles, directed_gap, gap, oblique_projector_norm_identity, projector,
    ObliqueNormReport, Subspace,
};
pub use svd::{singular_values, svd, SvdResult, MAX_SWEEPS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },
    #[error("basis columns are not orthonormal (max |BᵀB − I| = {defect:.3e})")]
    NotOrthonormal { defect: f64 },
    #[error("canonical angles need dim(first) <= dim(second), got {first} > {second}; swap the arguments")]
    AngleArgumentOrder { first: usize, second: usize },
    #[error("matrix is not idempotent: ‖S² − S‖ = {residual:.3e} exceeds {allowed:.3e}")]
    NotIdempotent { residual: f64, allowed: f64 },
}

/// Relative cutoff for numerical rank: singular values at or below
/// `tol · σ_max` count as zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum RankTol {
    /// `max(rows, cols) · f64::EPSILON`.
    #[default]
    Default,
    Relative(f64),
}

impl RankTol {
    pub fn relative(self, rows: usize, cols: usize) -> f64 {
        match self {
            RankTol::Default => rows.max(cols) as f64 * f64::EPSILON,
            RankTol::Relative(t) => t,
        }
    }

    /// Absolute threshold for a matrix of the given shape and largest singular value.
    pub fn cutoff(self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.relative(rows, cols) * sigma_max
    }
}

impl From<Option<f64>> for RankTol {
    fn from(t: Option<f64>) -> Self {
        t.map_or(RankTol::Default, RankTol::Relative)
    }
}

fn numerical_rank(a: &DenseMatrix, s: &SvdResult, tol: RankTol) -> usize {
    let sigma_max = s.sigma_max();
    if sigma_max == 0.0 {
        return 0;
    }
    s.rank_above(tol.cutoff(a.rows(), a.cols(), sigma_max))
}

/// Moore–Penrose pseudo-inverse via SVD, dropping singular values at or below
/// the rank cutoff.
pub fn pseudo_inverse(a: &DenseMatrix, tol: RankTol) -> Result<DenseMatrix, LinalgError> {
    let s = svd(a)?;
    let r = numerical_rank(a, &s, tol);
    let (rows, cols) = a.shape();
    Ok(DenseMatrix::from_fn(cols, rows, |i, j| {
        (0..r)
            .map(|l| s.vt.get(l, i) * s.u.get(j, l) / s.singular_values[l])
            .sum()
    }))
}

/// Orthonormal basis of the numerical column space.
pub fn orthonormal_range(a: &DenseMatrix, tol: RankTol) -> Result<Subspace, LinalgError> {
    let s = svd(a)?;
    let r = numerical_rank(a, &s, tol);
    Ok(Subspace::from_orthonormal_unchecked(s.u.columns(0..r)))
}

/// Orthonormal basis of the numerical null space; `dim = cols − rank`.
pub fn kernel_basis(a: &DenseMatrix, tol: RankTol) -> Result<Subspace, LinalgError> {
    let s = svd(a)?;
    let r = numerical_rank(a, &s, tol);
    let cols = a.cols();
    let basis = DenseMatrix::from_fn(cols, cols - r, |i, j| s.vt.get(r + j, i));
    Ok(Subspace::from_orthonormal_unchecked(basis))
}

/// Numerical rank under `tol`.
pub fn rank(a: &DenseMatrix, tol: RankTol) -> Result<usize, LinalgError> {
    let s = svd(a)?;
    Ok(numerical_rank(a, &s, tol))
}
