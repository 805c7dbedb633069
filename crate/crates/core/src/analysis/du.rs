//! Du's projection with the right-hand side `yₖ = (2ᵏ − 1)√3/4ᵏ`.
//!
//! `Tₙ†y = Pₙy − cₙPₙe` with `cₙ = 4ⁿ⟨(I − Pₙ)y, e⟩ = 1 − (3/7)2⁻ⁿ`. The
//! coefficient tends to `1` while `⟨y, e⟩ = 4/7`, so `Tₙ†y` stays bounded
//! but keeps a component `≈ (3/7)e` away from `T†y = y − (4/7)e`.

use serde::{Deserialize, Serialize};

use super::{make_lpa, AnalysisError, Check};
use crate::gallery::{du_bad_y, du_vector_e, OperatorFamily, Truncation};
use crate::tolerances::Tolerances;

/// Beyond this `4ⁿ` amplifies the rounding in `⟨(I − Pₙ)y, e⟩` past the
/// tolerances checked here.
pub const DU_N_MAX: usize = 20;

/// Closed form applies to `Tₙ†y` to `1e-6` up to this `n`.
const CLOSED_FORM_N_MAX: usize = 12;
const COEFFICIENT_TOL: f64 = 1e-9;
const CLOSED_FORM_TOL: f64 = 1e-6;
const FLOOR_FROM_N: usize = 8;
const ERROR_FLOOR: f64 = 0.3;
const NORM_CAP: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuRow {
    pub n: usize,
    pub m: usize,
    /// `4ⁿ⟨(I − Pₙ)y, e⟩` summed directly.
    pub coefficient: f64,
    /// `1 − (3/7)2⁻ⁿ`.
    pub closed_form: f64,
    /// `‖Tₙ†y − (Pₙy − cₙPₙe)‖ / ‖Pₙy − cₙPₙe‖`.
    pub pinv_rel_error: f64,
    pub theta_n: f64,
    pub kernel_core_dim: usize,
    pub kernel_dim: usize,
    pub norm_tn_dag_y: f64,
    /// `‖Tₙ†y − T†y‖`.
    pub error_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuDivergenceReport {
    pub rows: Vec<DuRow>,
    /// `⟨y, e⟩`, whose exact value is `4/7`.
    pub inner_product: f64,
    pub checks: Vec<Check>,
}

impl DuDivergenceReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

fn du_row(n: usize, tolerances: Tolerances) -> Result<DuRow, AnalysisError> {
    let m = Truncation::Auto.m_for(n);
    let inst = make_lpa(&OperatorFamily::Du, n, m, tolerances)?;
    let y = du_bad_y(m);
    let e = du_vector_e(m);
    let tail: f64 = (n..m).map(|k| y[k] * e[k]).sum();
    let coefficient = 4f64.powi(n as i32) * tail;

    let x = inst.tn_pinv_apply(&y)?;
    let predicted = y.truncated(n).axpy(-coefficient, &e.truncated(n));
    let pinv_rel_error = (&x - &predicted).norm() / predicted.norm();

    let t_dag_y = inst.t_pinv_apply(&y)?;
    Ok(DuRow {
        n,
        m,
        coefficient,
        closed_form: 1.0 - (3.0 / 7.0) * 2f64.powi(-(n as i32)),
        pinv_rel_error,
        theta_n: inst.offset_angle()?.theta,
        kernel_core_dim: inst.kernel_core()?.dim(),
        kernel_dim: inst.kernel_of_t()?.dim(),
        norm_tn_dag_y: x.norm(),
        error_norm: (&x - &t_dag_y).norm(),
    })
}

/// Finite-`n` evidence that `Tₙ†y` is bounded but does not approach `T†y`.
pub fn du_divergence_check(n_max: usize, tolerances: Tolerances) -> Result<DuDivergenceReport, AnalysisError> {
    if n_max > DU_N_MAX {
        return Err(AnalysisError::PrecisionCap {
            n_max,
            cap: DU_N_MAX,
        });
    }
    let rows = (1..=n_max)
        .map(|n| du_row(n, tolerances))
        .collect::<Result<Vec<_>, _>>()?;
    let m = Truncation::Auto.m_for(n_max.max(1));
    let inner_product = du_bad_y(m).dot(&du_vector_e(m));

    let coeff_err = max(rows.iter().map(|r| (r.coefficient - r.closed_form).abs()));
    let closed_err = max(
        rows.iter()
            .filter(|r| r.n <= CLOSED_FORM_N_MAX)
            .map(|r| r.pinv_rel_error),
    );
    let theta_max = max(rows.iter().map(|r| r.theta_n));
    let tail: Vec<&DuRow> = rows.iter().filter(|r| r.n >= FLOOR_FROM_N).collect();
    let norm_max = max(tail.iter().map(|r| r.norm_tn_dag_y));
    let floor_min = tail.iter().map(|r| r.error_norm).fold(f64::INFINITY, f64::min);
    let cores_trivial = rows.iter().all(|r| r.kernel_core_dim == 0 && r.kernel_dim == 1);
    let last = rows.last().map_or(0.0, |r| r.coefficient);

    let checks = vec![
        Check::new(
            "4^n <(I-P_n)y, e> = 1 - (3/7) 2^-n",
            coeff_err <= COEFFICIENT_TOL,
            format!("max abs error {coeff_err:.3e} (tol {COEFFICIENT_TOL:.0e})"),
        ),
        Check::new(
            format!("T_n^+ y = P_n y - c_n P_n e for n <= {CLOSED_FORM_N_MAX}"),
            closed_err <= CLOSED_FORM_TOL,
            format!("max relative error {closed_err:.3e} (tol {CLOSED_FORM_TOL:.0e})"),
        ),
        Check::new(
            "theta_n = 0",
            theta_max <= tolerances.theta_zero,
            format!("max theta_n {theta_max:.3e} (tol {:.0e})", tolerances.theta_zero),
        ),
        Check::new(
            "kernel core {0} while dim N(T) = 1",
            cores_trivial,
            format!("checked n = 1..={n_max}"),
        ),
        Check::new(
            format!("|T_n^+ y| <= {NORM_CAP} for n >= {FLOOR_FROM_N}"),
            norm_max <= NORM_CAP,
            if tail.is_empty() {
                "no n in range".to_string()
            } else {
                format!("max {norm_max:.6}")
            },
        ),
        Check::new(
            format!("|T_n^+ y - T^+ y| >= {ERROR_FLOOR} for n >= {FLOOR_FROM_N}"),
            floor_min >= ERROR_FLOOR,
            if tail.is_empty() {
                "no n in range".to_string()
            } else {
                format!("min {floor_min:.6}")
            },
        ),
        Check::new(
            "<y, e> = 4/7 while c_n -> 1",
            (inner_product - 4.0 / 7.0).abs() <= 1e-12 && (last - 1.0).abs() < (last - inner_product).abs(),
            format!("<y, e> = {inner_product:.15}, c_{n_max} = {last:.15}"),
        ),
    ];
    Ok(DuDivergenceReport {
        rows,
        inner_product,
        checks,
    })
}
