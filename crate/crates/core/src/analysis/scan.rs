use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_lpa, AnalysisError};
use crate::gallery::{OperatorFamily, Truncation};
use crate::linalg::gap;
use crate::tolerances::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub n: usize,
    pub m: usize,
    pub kernel_core_dim: usize,
    pub kernel_dim: usize,
    /// `gap(N(T) ∩ Xₙ, N(T))`.
    pub kernel_gap: f64,
}

impl KernelRow {
    pub fn reached(&self, kernel_gap_tol: f64) -> bool {
        self.kernel_core_dim == self.kernel_dim && self.kernel_gap <= kernel_gap_tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelScan {
    pub rows: Vec<KernelRow>,
    /// The core has reached `N(T)` by the last tested `n`.
    pub holds: bool,
    pub n_star: Option<usize>,
}

impl KernelScan {
    pub fn violated_at_tested_range(&self) -> bool {
        !self.holds
    }
}

/// Smallest `n` whose core has reached the kernel.
pub fn n_star(rows: &[KernelRow], kernel_gap_tol: f64) -> Option<usize> {
    rows.iter().find(|r| r.reached(kernel_gap_tol)).map(|r| r.n)
}

/// Core dimension and kernel gap for each `n` in an ascending list.
pub fn kernel_approximability_scan(
    family: &OperatorFamily,
    n_list: &[usize],
    m_rule: Truncation,
    tolerances: Tolerances,
) -> Result<KernelScan, AnalysisError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::Precondition(
            "n_list must be nonempty and strictly ascending".into(),
        ));
    }
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let inst = make_lpa(family, n, m_rule.m_for(n), tolerances)?;
            let core = inst.kernel_core()?;
            let kernel = inst.kernel_of_t()?;
            Ok(KernelRow {
                n,
                m: inst.m(),
                kernel_core_dim: core.dim(),
                kernel_dim: kernel.dim(),
                kernel_gap: gap(&core, kernel)?,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let tol = tolerances.kernel_gap;
    Ok(KernelScan {
        holds: rows.last().is_some_and(|r| r.reached(tol)),
        n_star: n_star(&rows, tol),
        rows,
    })
}
