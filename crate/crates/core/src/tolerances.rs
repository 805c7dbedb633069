//! Every numerical slack used by the diagnostics, in one record.
//!
//! The underlying identities are exact; each field here is the amount of
//! floating-point disagreement a check accepts before it reports failure.

use serde::{Deserialize, Serialize};

use crate::linalg::RankTol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative rank cutoff; `None` means `max(rows, cols)·ε`.
    pub rank_tol: Option<f64>,
    /// `|sin θ (gap route) − sin θ (Qₙ route)|` accepted as agreement.
    pub route_agreement: f64,
    /// Route disagreement above this raises the truncation warning flag.
    pub route_warning: f64,
    /// `θₙ` at or below this counts as zero.
    pub theta_zero: f64,
    /// `gap(N(T) ∩ Xₙ, N(T))` at or below this counts as a reached kernel.
    pub kernel_gap: f64,
    /// `‖(I − P_{Xₙ})Tₙ†y‖ ≤ membership·‖Tₙ†y‖`.
    pub membership: f64,
    /// Error identity residual allowed, relative to `1 + ‖T†y‖`.
    pub error_identity: f64,
    /// Error bound slack: `lhs ≤ rhs·(1 + bound_rel) + bound_abs`.
    pub bound_rel: f64,
    pub bound_abs: f64,
    /// Tolerance for the three zero-offset conditions.
    pub zero_offset: f64,
    /// Slack on `√(1 + tan²θₙ) ≤ β/α`.
    pub coercive: f64,
    /// `‖Qₙ² − Qₙ‖ ≤ idempotence·(1 + ‖Qₙ‖²)`.
    pub idempotence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: None,
            route_agreement: 1e-6,
            route_warning: 1e-4,
            theta_zero: 1e-8,
            kernel_gap: 1e-8,
            membership: 1e-9,
            error_identity: 1e-7,
            bound_rel: 1e-6,
            bound_abs: 1e-9,
            zero_offset: 1e-8,
            coercive: 1e-8,
            idempotence: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn rank(&self) -> RankTol {
        RankTol::from(self.rank_tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let t: Tolerances = serde_json::from_str(r#"{"rank_tol": 1e-10}"#).unwrap();
        assert_eq!(t.rank(), RankTol::Relative(1e-10));
        assert_eq!(t.route_agreement, 1e-6);
        assert!(serde_json::from_str::<Tolerances>(r#"{"bogus": 1}"#).is_err());
    }
}
