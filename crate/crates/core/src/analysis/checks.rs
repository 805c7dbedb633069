use serde::{Deserialize, Serialize};

use super::{AnalysisError, LpaInstance};
use crate::linalg::{directed_gap, kernel_basis, orthonormal_range, projector, DenseMatrix, DenseVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorIdentityReport {
    /// `‖Tₙ†y − T†y‖`.
    pub lhs_norm: f64,
    /// `‖(Tₙ†T − I)(I − P_{Xₙ})T†y‖`.
    pub rhs_norm: f64,
    pub residual: f64,
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    /// `‖Tₙ†y − T†y‖`.
    pub lhs: f64,
    /// `√(1 + tan²θₙ)·dist(T†y, Xₙ)`.
    pub rhs: f64,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<f64>,
    pub bound_factor: f64,
    pub dist: f64,
    pub pass: bool,
}

/// The three conditions equivalent to `θₙ = 0`, each evaluated on its own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroOffsetReport {
    pub n: usize,
    pub theta: f64,
    pub theta_zero: bool,
    /// `max_j ‖(Tₙ† − P_{Xₙ}T†)eʲ‖`.
    pub pinv_residual: f64,
    pub pinv_is_projected_pinv: bool,
    /// `δ(N(T) + T*T(Xₙ), Xₙ)`.
    pub invariance_deficiency: f64,
    pub invariance_holds: bool,
    /// All three conditions agree.
    pub consistent: bool,
    /// First basis vector `x` of `Xₙ` with `T*Tx ∉ Xₙ`.
    pub witness: Option<String>,
    /// `N(T) ⊆ Xₙ` numerically; the equivalence presumes it.
    pub kernel_contained: bool,
}

impl LpaInstance {
    /// Evaluates `Tₙ†y − T†y` and `(Tₙ†T − I)(I − P_{Xₙ})T†y` separately.
    pub fn error_identity_check(&self, y: &DenseVector) -> Result<ErrorIdentityReport, AnalysisError> {
        let tn_pinv = self.tn_pinv()?;
        let t_dag_y = self.t_pinv_apply(y)?;
        let lhs = &tn_pinv.mul_vec(y) - &t_dag_y;
        let w = self.reject_x(&t_dag_y);
        let rhs = &tn_pinv.mul_vec(&self.t().mul_vec(&w)) - &w;
        let residual = (&lhs - &rhs).norm();
        let allowed = self.tolerances().error_identity * (1.0 + t_dag_y.norm());
        Ok(ErrorIdentityReport {
            lhs_norm: lhs.norm(),
            rhs_norm: rhs.norm(),
            residual,
            allowed,
            pass: residual <= allowed,
        })
    }

    /// `δ(N(T), Xₙ)`: how far the kernel sticks out of `Xₙ`.
    pub fn kernel_deficiency(&self) -> Result<f64, AnalysisError> {
        Ok(directed_gap(self.kernel_of_t()?, self.x_n())?)
    }

    /// `‖Tₙ†y − T†y‖ ≤ √(1 + tan²θₙ)·dist(T†y, Xₙ)`; refuses unless `N(T) ⊆ Xₙ`.
    pub fn error_bound_check(&self, y: &DenseVector) -> Result<BoundReport, AnalysisError> {
        let deficiency = self.kernel_deficiency()?;
        if deficiency > self.tolerances().kernel_gap {
            return Err(AnalysisError::BoundNotAsserted {
                n: self.n(),
                deficiency,
            });
        }
        let t_dag_y = self.t_pinv_apply(y)?;
        let lhs = (&self.tn_pinv_apply(y)? - &t_dag_y).norm();
        let dist = self.reject_x(&t_dag_y).norm();
        let bound_factor = self.offset_angle()?.bound_factor();
        let rhs = bound_factor * dist;
        let tol = self.tolerances();
        Ok(BoundReport {
            n: self.n(),
            lhs,
            rhs,
            ratio: (rhs > 0.0).then(|| lhs / rhs),
            bound_factor,
            dist,
            pass: lhs <= rhs * (1.0 + tol.bound_rel) + tol.bound_abs,
        })
    }

    pub fn zero_offset_characterization(&self) -> Result<ZeroOffsetReport, AnalysisError> {
        let tol = self.tolerances().zero_offset;
        let theta = self.offset_angle()?.theta;

        let t_pinv = self.t_pinv()?;
        let diff = self.tn_pinv()? - &self.projector_x().matmul(t_pinv);
        let max_col = |a: &DenseMatrix| (0..a.cols()).map(|j| a.column(j).norm()).fold(0.0, f64::max);
        let pinv_residual = max_col(&diff);
        let pinv_scale = 1.0 + max_col(t_pinv);

        let rank_tol = self.tolerances().rank();
        let normal_image = self.t().transpose().matmul(&self.t().matmul(self.x_n().basis()));
        let sum = self
            .kernel_of_t()?
            .sum(&orthonormal_range(&normal_image, rank_tol)?, rank_tol)?;
        let invariance_deficiency = directed_gap(&sum, self.x_n())?;

        let basis = self.x_n().basis();
        let (rows, cols) = self.t().shape();
        let t_scale = self.t().frobenius_norm();
        let negligible = rank_tol.cutoff(rows, cols, t_scale * t_scale);
        let witness = (0..basis.cols()).find_map(|j| {
            let w = normal_image.column(j);
            let norm = w.norm();
            let out = self.reject_x(&w).norm();
            (norm > negligible && out > tol * norm).then(|| {
                let b = basis.column(j);
                let coordinate = b == DenseVector::basis(b.dim(), j);
                if coordinate {
                    format!("T*T e{} not in X_n (|(I-P)T*Te{}| / |T*Te{}| = {:.3e})", j + 1, j + 1, j + 1, out / norm)
                } else {
                    format!("T*T x{} not in X_n for basis vector x{} (relative deficiency {:.3e})", j + 1, j + 1, out / norm)
                }
            })
        });

        let theta_zero = theta <= self.tolerances().theta_zero;
        let pinv_is_projected_pinv = pinv_residual <= tol * pinv_scale;
        let invariance_holds = invariance_deficiency <= tol;
        Ok(ZeroOffsetReport {
            n: self.n(),
            theta,
            theta_zero,
            pinv_residual,
            pinv_is_projected_pinv,
            invariance_deficiency,
            invariance_holds,
            consistent: theta_zero == pinv_is_projected_pinv && theta_zero == invariance_holds,
            witness,
            kernel_contained: self.kernel_deficiency()? <= self.tolerances().kernel_gap,
        })
    }

    /// `‖P_{N(Tₙ)} − (P_{N(T)∩Xₙ} + I − P_{Xₙ})‖`.
    pub fn kernel_splitting_residual(&self) -> Result<f64, AnalysisError> {
        let p_kernel_tn = projector(&kernel_basis(&self.tn(), self.tolerances().rank())?);
        let p_core = projector(&self.kernel_core()?);
        let dim = self.x_n().ambient_dim();
        let split = &(&p_core + &DenseMatrix::identity(dim)) - &self.projector_x();
        Ok((&p_kernel_tn - &split).spectral_norm()?)
    }

    /// `‖Qₙ − P_{N(T)⊥}·Tₙ†·T‖` with `P_{N(T)⊥} = I − P_{N(T)}`.
    pub fn qn_factorization_residual(&self) -> Result<f64, AnalysisError> {
        let q = self.qn_matrix()?;
        let dim = q.rows();
        let p_perp = &DenseMatrix::identity(dim) - &projector(self.kernel_of_t()?);
        let rhs = p_perp.matmul(self.tn_pinv()?).matmul(self.t());
        Ok((&q - &rhs).spectral_norm()?)
    }

    /// `(‖Qₙ² − Qₙ‖, idempotence·(1 + ‖Qₙ‖²))`.
    pub fn qn_idempotence(&self) -> Result<(f64, f64), AnalysisError> {
        let q = self.qn_matrix()?;
        let residual = (&q.matmul(&q) - &q).spectral_norm()?;
        let norm = q.spectral_norm()?;
        Ok((residual, self.tolerances().idempotence * (1.0 + norm * norm)))
    }
}
