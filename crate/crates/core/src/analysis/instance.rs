use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::gallery::OperatorFamily;
use crate::linalg::{
    gap, kernel_basis, orthonormal_range, projector, pseudo_inverse, DenseMatrix, DenseVector,
    LinalgError, RankTol, Subspace,
};
use crate::tolerances::Tolerances;

/// `(T, Xₙ)` at a fixed truncation. `Tₙ = T·P_{Xₙ}` and the pseudo-inverses
/// are computed on first use and cached.
#[derive(Clone, Debug)]
pub struct LpaInstance {
    t: DenseMatrix,
    x_n: Subspace,
    n: usize,
    tolerances: Tolerances,
    t_pinv: OnceLock<Result<DenseMatrix, LinalgError>>,
    tn_pinv: OnceLock<Result<DenseMatrix, LinalgError>>,
    kernel: OnceLock<Result<Subspace, LinalgError>>,
}

fn cached<T>(
    cell: &OnceLock<Result<T, LinalgError>>,
    init: impl FnOnce() -> Result<T, LinalgError>,
) -> Result<&T, AnalysisError> {
    cell.get_or_init(init)
        .as_ref()
        .map_err(|e| AnalysisError::Linalg(e.clone()))
}

/// `θₙ` and both routes to `sin θₙ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetAngle {
    /// `arcsin` of the gap route.
    pub theta: f64,
    /// `gap(T†T(Xₙ), T*T(Xₙ))`.
    pub sin_gap_route: f64,
    /// `√(1 − ‖I − Qₙ‖⁻²)`.
    pub sin_qn_route: f64,
    /// `dim T†T(Xₙ) ≠ dim T*T(Xₙ)` after rank truncation.
    pub rank_mismatch: bool,
    /// Routes disagree beyond `route_warning`: suspect truncation error.
    pub route_warning: bool,
}

impl OffsetAngle {
    /// `√(1 + tan²θₙ) = 1/cos θₙ`.
    pub fn bound_factor(&self) -> f64 {
        1.0 / self.theta.cos()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticFlags {
    pub rank_mismatch: bool,
    pub route_warning: bool,
}

/// Every per-`n` quantity of one LPA instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpaDiagnostics {
    pub n: usize,
    pub m: usize,
    pub theta_n: f64,
    pub sin_theta_gap: f64,
    pub sin_theta_qn: f64,
    pub norm_tn_dag_t: f64,
    pub kernel_core_dim: usize,
    pub kernel_dim: usize,
    pub kernel_gap: f64,
    pub bound_factor: f64,
    pub flags: DiagnosticFlags,
}

/// Truncates `family` at `m` and pairs it with its `n`-th subspace.
pub fn make_lpa(
    family: &OperatorFamily,
    n: usize,
    m: usize,
    tolerances: Tolerances,
) -> Result<LpaInstance, AnalysisError> {
    if n > m {
        return Err(AnalysisError::IndexExceedsTruncation { n, m });
    }
    let t = family.truncate(m)?;
    let x_n = family.subspace(n, m)?;
    LpaInstance::new(t, x_n, n, tolerances)
}

impl LpaInstance {
    pub fn new(
        t: DenseMatrix,
        x_n: Subspace,
        n: usize,
        tolerances: Tolerances,
    ) -> Result<Self, AnalysisError> {
        if x_n.ambient_dim() != t.cols() {
            return Err(AnalysisError::SubspaceMismatch {
                subspace: x_n.ambient_dim(),
                cols: t.cols(),
            });
        }
        if n > t.rows() {
            return Err(AnalysisError::IndexExceedsTruncation { n, m: t.rows() });
        }
        Ok(Self {
            t,
            x_n,
            n,
            tolerances,
            t_pinv: OnceLock::new(),
            tn_pinv: OnceLock::new(),
            kernel: OnceLock::new(),
        })
    }

    /// `Xₙ = span{e¹…eⁿ}`.
    pub fn coordinate(t: DenseMatrix, n: usize, tolerances: Tolerances) -> Result<Self, AnalysisError> {
        if n > t.cols() {
            return Err(AnalysisError::IndexExceedsTruncation { n, m: t.cols() });
        }
        let x_n = Subspace::coordinate(t.cols(), n);
        Self::new(t, x_n, n, tolerances)
    }

    pub fn t(&self) -> &DenseMatrix {
        &self.t
    }

    pub fn x_n(&self) -> &Subspace {
        &self.x_n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.t.rows()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    fn rank_tol(&self) -> RankTol {
        self.tolerances.rank()
    }

    pub fn projector_x(&self) -> DenseMatrix {
        projector(&self.x_n)
    }

    /// `(I − P_{Xₙ})v`.
    pub(crate) fn reject_x(&self, v: &DenseVector) -> DenseVector {
        let b = self.x_n.basis();
        let coeffs = b.tr_mul_vec(v);
        v - &b.mul_vec(&coeffs)
    }

    /// `Tₙ = T·P_{Xₙ}`.
    pub fn tn(&self) -> DenseMatrix {
        self.t.matmul(&self.projector_x())
    }

    pub fn t_pinv(&self) -> Result<&DenseMatrix, AnalysisError> {
        cached(&self.t_pinv, || pseudo_inverse(&self.t, self.rank_tol()))
    }

    pub fn tn_pinv(&self) -> Result<&DenseMatrix, AnalysisError> {
        cached(&self.tn_pinv, || pseudo_inverse(&self.tn(), self.rank_tol()))
    }

    pub fn kernel_of_t(&self) -> Result<&Subspace, AnalysisError> {
        cached(&self.kernel, || kernel_basis(&self.t, self.rank_tol()))
    }

    fn check_rhs(&self, y: &DenseVector) -> Result<(), AnalysisError> {
        if y.dim() != self.m() {
            return Err(AnalysisError::RhsDimension {
                got: y.dim(),
                expected: self.m(),
            });
        }
        Ok(())
    }

    /// `Tₙ†y`, checked to lie in `Xₙ`.
    pub fn tn_pinv_apply(&self, y: &DenseVector) -> Result<DenseVector, AnalysisError> {
        self.check_rhs(y)?;
        let x = self.tn_pinv()?.mul_vec(y);
        let residual = self.reject_x(&x).norm();
        let norm = x.norm();
        if residual > self.tolerances.membership * norm.max(f64::MIN_POSITIVE) {
            return Err(AnalysisError::MembershipViolation { residual, norm });
        }
        Ok(x)
    }

    pub fn t_pinv_apply(&self, y: &DenseVector) -> Result<DenseVector, AnalysisError> {
        self.check_rhs(y)?;
        Ok(self.t_pinv()?.mul_vec(y))
    }

    /// `T(Xₙ)` as an orthonormal basis.
    pub fn image_of_x(&self) -> Result<Subspace, AnalysisError> {
        Ok(orthonormal_range(
            &self.t.matmul(self.x_n.basis()),
            self.rank_tol(),
        )?)
    }

    /// `Qₙ = T†·P_{T(Xₙ)}·T`.
    pub fn qn_matrix(&self) -> Result<DenseMatrix, AnalysisError> {
        let p_image = projector(&self.image_of_x()?);
        Ok(self.t_pinv()?.matmul(&p_image).matmul(&self.t))
    }

    /// `N(T) ∩ Xₙ = Bₙ · N(T·Bₙ)`.
    pub fn kernel_core(&self) -> Result<Subspace, AnalysisError> {
        let b = self.x_n.basis();
        let local = kernel_basis(&self.t.matmul(b), self.rank_tol())?;
        Ok(Subspace::from_orthonormal_unchecked(b.matmul(local.basis())))
    }

    pub fn offset_angle(&self) -> Result<OffsetAngle, AnalysisError> {
        let tol = self.rank_tol();
        let tb = self.t.matmul(self.x_n.basis());
        let pinv_side = orthonormal_range(&self.t_pinv()?.matmul(&tb), tol)?;
        let adjoint_side = orthonormal_range(&self.t.transpose().matmul(&tb), tol)?;
        let sin_gap_route = gap(&pinv_side, &adjoint_side)?;

        let q = self.qn_matrix()?;
        let i_minus_q = &DenseMatrix::identity(q.rows()) - &q;
        let s = i_minus_q.spectral_norm()?;
        let sin_qn_route = if s <= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (s * s)).max(0.0).sqrt()
        };

        Ok(OffsetAngle {
            theta: sin_gap_route.clamp(0.0, 1.0).asin(),
            sin_gap_route,
            sin_qn_route,
            rank_mismatch: pinv_side.dim() != adjoint_side.dim(),
            route_warning: (sin_gap_route - sin_qn_route).abs() > self.tolerances.route_warning,
        })
    }

    /// `‖Tₙ†T‖`.
    pub fn norm_tn_dag_t(&self) -> Result<f64, AnalysisError> {
        Ok(self.tn_pinv()?.matmul(&self.t).spectral_norm()?)
    }

    pub fn diagnostics(&self) -> Result<LpaDiagnostics, AnalysisError> {
        let angle = self.offset_angle()?;
        let core = self.kernel_core()?;
        let kernel = self.kernel_of_t()?;
        Ok(LpaDiagnostics {
            n: self.n,
            m: self.m(),
            theta_n: angle.theta,
            sin_theta_gap: angle.sin_gap_route,
            sin_theta_qn: angle.sin_qn_route,
            norm_tn_dag_t: self.norm_tn_dag_t()?,
            kernel_core_dim: core.dim(),
            kernel_dim: kernel.dim(),
            kernel_gap: gap(&core, kernel)?,
            bound_factor: angle.bound_factor(),
            flags: DiagnosticFlags {
                rank_mismatch: angle.rank_mismatch,
                route_warning: angle.route_warning,
            },
        })
    }
}
