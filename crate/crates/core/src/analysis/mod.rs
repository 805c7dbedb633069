//! LPA instances and every diagnostic computed on them.

mod checks;
mod coercive;
mod du;
mod instance;
mod scan;

pub use checks::{BoundReport, ErrorIdentityReport, ZeroOffsetReport};
pub use coercive::{coercive_bound_check, field_of_values_lower_bound, CoerciveReport, CoerciveRow};
pub use du::{du_divergence_check, DuDivergenceReport, DuRow, DU_N_MAX};
pub use instance::{make_lpa, DiagnosticFlags, LpaDiagnostics, LpaInstance, OffsetAngle};
pub use scan::{kernel_approximability_scan, n_star, KernelRow, KernelScan};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gallery::GalleryError;
use crate::linalg::LinalgError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Gallery(#[from] GalleryError),
    #[error("subspace index n = {n} exceeds truncation m = {m}")]
    IndexExceedsTruncation { n: usize, m: usize },
    #[error("subspace lives in R^{subspace} but T has {cols} columns")]
    SubspaceMismatch { subspace: usize, cols: usize },
    #[error("right-hand side has dimension {got}, expected {expected}")]
    RhsDimension { got: usize, expected: usize },
    #[error("bound not asserted below n*: N(T) is not inside X_n at n = {n} (deficiency {deficiency:.3e})")]
    BoundNotAsserted { n: usize, deficiency: f64 },
    #[error("T_n^+ y leaves X_n: |(I - P)x| = {residual:.3e}, |x| = {norm:.3e}")]
    MembershipViolation { residual: f64, norm: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("n_max = {n_max} exceeds the precision cap {cap}")]
    PrecisionCap { n_max: usize, cap: usize },
}

/// One labelled pass/fail outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            pass,
            detail: detail.into(),
        }
    }
}
