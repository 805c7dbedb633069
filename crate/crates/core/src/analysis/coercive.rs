use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, LpaInstance};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::tolerances::Tolerances;

const SAMPLES: usize = 256;
const SAMPLE_SEED: u64 = 0x5eed;
/// Relative slack on the caller's `α` and `β`.
const PRECONDITION_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoerciveRow {
    pub n: usize,
    pub theta_n: f64,
    pub bound_factor: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoerciveReport {
    pub alpha: f64,
    pub beta: f64,
    pub norm_t: f64,
    /// `min |⟨Tu, u⟩|` over unit `u`, from the symmetric part.
    pub field_of_values_bound: f64,
    pub rows: Vec<CoerciveRow>,
}

impl CoerciveReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// `inf_{‖u‖=1} |⟨Tu, u⟩|`: the distance from 0 to the spectrum of the
/// symmetric part `H`, or 0 when `H` is indefinite.
pub fn field_of_values_lower_bound(t: &DenseMatrix) -> Result<f64, AnalysisError> {
    let h = t.symmetric_part();
    let s = h.spectral_norm()?;
    let shifted = |sign: f64| -> Result<f64, AnalysisError> {
        let a = DenseMatrix::from_fn(h.rows(), h.cols(), |i, j| {
            let d = if i == j { s } else { 0.0 };
            d - sign * h.get(i, j)
        });
        Ok(a.spectral_norm()?)
    };
    // sI − H ⪰ 0, so λ_min(H) = s − ‖sI − H‖; likewise for −H.
    let lambda_min = s - shifted(1.0)?;
    let lambda_max = shifted(-1.0)? - s;
    Ok(if lambda_min > 0.0 {
        lambda_min
    } else if lambda_max < 0.0 {
        -lambda_max
    } else {
        0.0
    })
}

/// Verifies `|⟨Tu, u⟩| ≥ α‖u‖²` and `‖T‖ ≤ β`, then checks
/// `√(1 + tan²θₙ) ≤ β/α` for coordinate subspaces of each size in `n_list`.
pub fn coercive_bound_check(
    t: &DenseMatrix,
    alpha: f64,
    beta: f64,
    n_list: &[usize],
    tolerances: Tolerances,
) -> Result<CoerciveReport, AnalysisError> {
    let fail = |msg: String| Err(AnalysisError::Precondition(format!("coercivity: {msg}")));
    if !t.is_square() {
        return fail(format!("T must be square, got {:?}", t.shape()));
    }
    if !(alpha > 0.0 && beta.is_finite()) {
        return fail(format!("need alpha > 0 and finite beta, got alpha = {alpha}, beta = {beta}"));
    }
    let fov = field_of_values_lower_bound(t)?;
    if fov < alpha * (1.0 - PRECONDITION_SLACK) {
        return fail(format!("symmetric part gives |<Tu,u>| >= {fov:.6e} < alpha = {alpha:.6e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for _ in 0..SAMPLES {
        let u = DenseVector::from_vec((0..t.cols()).map(|_| rng.sample(StandardNormal)).collect());
        let u = u.scale(1.0 / u.norm());
        let q = t.mul_vec(&u).dot(&u).abs();
        if q < alpha * (1.0 - PRECONDITION_SLACK) {
            return fail(format!("sampled |<Tu,u>| = {q:.6e} < alpha = {alpha:.6e}"));
        }
    }
    let norm_t = t.spectral_norm()?;
    if norm_t > beta * (1.0 + PRECONDITION_SLACK) {
        return fail(format!("|T| = {norm_t:.6e} > beta = {beta:.6e}"));
    }

    let cap = beta / alpha + tolerances.coercive;
    let rows = n_list
        .iter()
        .map(|&n| {
            let inst = LpaInstance::coordinate(t.clone(), n, tolerances)?;
            let angle = inst.offset_angle()?;
            let bound_factor = angle.bound_factor();
            Ok(CoerciveRow {
                n,
                theta_n: angle.theta,
                bound_factor,
                pass: bound_factor <= cap,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(CoerciveReport {
        alpha,
        beta,
        norm_t,
        field_of_values_bound: fov,
        rows,
    })
}
