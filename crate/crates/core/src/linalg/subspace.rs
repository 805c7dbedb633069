//! Finite-dimensional subspaces, orthogonal projectors, gaps and angles.

use super::{kernel_basis, orthonormal_range, singular_values, DenseMatrix, LinalgError, RankTol};

/// A subspace of `ℝ^ambient_dim`, stored as a matrix with orthonormal columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DenseMatrix,
}

impl Subspace {
    /// Maximum tolerated `|BᵀB − I|` entry for a user-supplied basis.
    pub const ORTHONORMALITY_TOL: f64 = 1e-12;

    pub fn new(basis: DenseMatrix) -> Result<Self, LinalgError> {
        let defect = basis.orthonormality_defect();
        if defect > Self::ORTHONORMALITY_TOL || basis.cols() > basis.rows() {
            return Err(LinalgError::NotOrthonormal { defect });
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_orthonormal_unchecked(basis: DenseMatrix) -> Self {
        debug_assert!(
            basis.orthonormality_defect() < 1e-10,
            "computed basis lost orthonormality"
        );
        Self { basis }
    }

    /// `{0}` in `ℝ^ambient_dim`.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            basis: DenseMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            basis: DenseMatrix::identity(ambient_dim),
        }
    }

    /// `span{e¹, …, eⁿ}` in `ℝ^ambient_dim`.
    pub fn coordinate(ambient_dim: usize, n: usize) -> Self {
        assert!(n <= ambient_dim, "coordinate subspace larger than ambient space");
        Self {
            basis: DenseMatrix::from_fn(ambient_dim, n, |i, j| if i == j { 1.0 } else { 0.0 }),
        }
    }

    /// Span of the columns of `vectors`, with numerical rank decided by `tol`.
    pub fn span(vectors: &DenseMatrix, tol: RankTol) -> Result<Self, LinalgError> {
        orthonormal_range(vectors, tol)
    }

    /// `self + other`.
    pub fn sum(&self, other: &Self, tol: RankTol) -> Result<Self, LinalgError> {
        Self::span(&self.basis.hstack(&other.basis)?, tol)
    }

    /// Orthogonal complement `self^⊥`.
    pub fn complement(&self) -> Result<Self, LinalgError> {
        if self.dim() == 0 {
            return Ok(Self::full(self.ambient_dim()));
        }
        kernel_basis(&self.basis.transpose(), RankTol::Default)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> DenseMatrix {
        self.basis
    }
}

/// Orthogonal projector `B·Bᵀ` onto `s`.
pub fn projector(s: &Subspace) -> DenseMatrix {
    s.basis.matmul(&s.basis.transpose())
}

fn check_ambient(op: &'static str, m: &Subspace, n: &Subspace) -> Result<(), LinalgError> {
    if m.ambient_dim() != n.ambient_dim() {
        return Err(LinalgError::DimensionMismatch {
            op,
            left: m.basis.shape(),
            right: n.basis.shape(),
        });
    }
    Ok(())
}

/// `gap(M, N) = ‖P_M − P_N‖`, the spectral norm of the projector difference.
///
/// Defined for subspaces of unequal dimension; the zero subspace has
/// `δ(0, N) = 0`, so `gap(0, N) = δ(N, 0) = 1` unless `N = 0` too.
pub fn gap(m: &Subspace, n: &Subspace) -> Result<f64, LinalgError> {
    check_ambient("gap", m, n)?;
    let diff = &projector(m) - &projector(n);
    Ok(diff.spectral_norm()?.min(1.0))
}

/// Directed deficiency `δ(M, N) = ‖(I − P_N)·P_M‖ = sup_{x ∈ M, ‖x‖=1} dist(x, N)`.
///
/// Evaluated as `‖B_M − B_N·(B_Nᵀ·B_M)‖`, which never forms either projector.
pub fn directed_gap(m: &Subspace, n: &Subspace) -> Result<f64, LinalgError> {
    check_ambient("directed_gap", m, n)?;
    if m.dim() == 0 {
        return Ok(0.0);
    }
    let coeffs = n.basis.transpose().matmul(&m.basis);
    let residual = &m.basis - &n.basis.matmul(&coeffs);
    Ok(residual.spectral_norm()?.min(1.0))
}

/// Canonical (principal) angles between `m` and `n`, nondecreasing in `[0, π/2]`.
///
/// Cosines are the singular values of `B_mᵀ·B_n` and sines those of
/// `(I − P_n)·B_m`. Angles below π/4 are taken from the sines and the rest
/// from the cosines, since `acos` loses half the digits near 0.
pub fn canonical_angles(m: &Subspace, n: &Subspace) -> Result<Vec<f64>, LinalgError> {
    check_ambient("canonical_angles", m, n)?;
    if m.dim() > n.dim() {
        return Err(LinalgError::AngleArgumentOrder {
            first: m.dim(),
            second: n.dim(),
        });
    }
    if m.dim() == 0 {
        return Ok(Vec::new());
    }
    let cross = n.basis.transpose().matmul(&m.basis);
    let residual = &m.basis - &n.basis.matmul(&cross);
    let mut from_cos: Vec<f64> = singular_values(&cross)?
        .into_iter()
        .map(|c| c.clamp(0.0, 1.0).acos())
        .collect();
    let mut from_sin: Vec<f64> = singular_values(&residual)?
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0).asin())
        .collect();
    from_cos.sort_by(f64::total_cmp);
    from_sin.sort_by(f64::total_cmp);
    from_sin.resize(from_cos.len(), 0.0);
    Ok(from_cos
        .into_iter()
        .zip(from_sin)
        .map(|(c, s)| if s < std::f64::consts::FRAC_PI_4 { s } else { c })
        .collect())
}

/// Result of checking `‖P_{N(S)}·P_{R(S)}‖ = √(1 − ‖S‖⁻²) = ‖P_{R(S)} − P_{R(Sᵀ)}‖`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObliqueNormReport {
    /// `‖P_{N(S)}·P_{R(S)}‖`.
    pub lhs: f64,
    /// `√(1 − ‖S‖⁻²)`, or 0 for `S = 0`.
    pub rhs: f64,
    /// `‖P_{R(S)} − P_{R(Sᵀ)}‖`.
    pub range_gap: f64,
    pub norm_s: f64,
    pub pass: bool,
}

/// Checks the norm identity for an idempotent `s`. Fails fast when
/// `‖S² − S‖ > tol·(1 + ‖S‖²)`.
pub fn oblique_projector_norm_identity(
    s: &DenseMatrix,
    tol: f64,
) -> Result<ObliqueNormReport, LinalgError> {
    if !s.is_square() {
        return Err(LinalgError::DimensionMismatch {
            op: "oblique_projector_norm_identity",
            left: s.shape(),
            right: s.shape(),
        });
    }
    let norm_s = s.spectral_norm()?;
    let residual = (&s.matmul(s) - s).spectral_norm()?;
    let allowed = tol * (1.0 + norm_s * norm_s);
    if residual > allowed {
        return Err(LinalgError::NotIdempotent { residual, allowed });
    }

    let range = orthonormal_range(s, RankTol::Default)?;
    let kernel = kernel_basis(s, RankTol::Default)?;
    let co_range = orthonormal_range(&s.transpose(), RankTol::Default)?;

    let lhs = projector(&kernel).matmul(&projector(&range)).spectral_norm()?;
    let rhs = if norm_s == 0.0 {
        0.0
    } else {
        (1.0 - norm_s.powi(-2)).max(0.0).sqrt()
    };
    let range_gap = gap(&range, &co_range)?;
    let pass = (lhs - rhs).abs() <= tol && (range_gap - rhs).abs() <= tol;
    Ok(ObliqueNormReport {
        lhs,
        rhs,
        range_gap,
        norm_s,
        pass,
    })
}
