//! Seeded verification suites run by `lpa verify <suite>`.
//!
//! Each suite aggregates many randomized or example-based cases into a few
//! labelled checks. All randomness comes from fixed seeds, so a suite either
//! always passes or always fails on a given platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    coercive_bound_check, du_divergence_check, kernel_approximability_scan, make_lpa, AnalysisError, Check,
    LpaInstance, DU_N_MAX,
};
use crate::gallery::{identity_plus_skew, random_frame, OperatorFamily, SingularSystem, Truncation};
use crate::linalg::{
    canonical_angles, directed_gap, gap, oblique_projector_norm_identity, projector, pseudo_inverse, DenseMatrix,
    DenseVector, LinalgError, RankTol, Subspace,
};
use crate::tolerances::Tolerances;

/// Suite names accepted by [`run_suite`]:
///
/// * `penrose`: Moore-Penrose axioms of the computed pseudo-inverse.
/// * `projectors`: projector idempotence and symmetry, gap symmetry, gap versus
///   canonical angles and directed gaps.
/// * `lemma30`: norm identities of oblique projectors.
/// * `eq37`: agreement of the two routes to `sin θₙ`, and `Qₙ` structure.
/// * `eq20`: the LPA error identity, kernel splitting and membership.
/// * `bounds`: error bound with a contained kernel, and the coercive bound.
/// * `du`, `seidman`, `best`: behavior of the corresponding gallery operators.
pub const SUITES: [&str; 9] = [
    "penrose",
    "projectors",
    "lemma30",
    "eq37",
    "eq20",
    "bounds",
    "du",
    "seidman",
    "best",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("unknown suite {name:?}; valid suites: {}", SUITES.join(", "))]
    Unknown { name: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl From<LinalgError> for SuiteError {
    fn from(e: LinalgError) -> Self {
        SuiteError::Analysis(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn run_suite(name: &str, tolerances: Tolerances) -> Result<SuiteReport, SuiteError> {
    let checks = match name {
        "penrose" => penrose()?,
        "projectors" => projectors()?,
        "lemma30" => oblique_norms()?,
        "eq37" => offset_routes(tolerances)?,
        "eq20" => error_identity(tolerances)?,
        "bounds" => bounds(tolerances)?,
        "du" => du_divergence_check(DU_N_MAX, tolerances)?.checks,
        "seidman" => seidman(tolerances)?,
        "best" => best(tolerances)?,
        other => {
            return Err(SuiteError::Unknown {
                name: other.to_string(),
            })
        }
    };
    Ok(SuiteReport {
        name: name.to_string(),
        checks,
    })
}

/// Running maximum of a residual over many cases.
struct MaxResidual {
    label: String,
    tol: f64,
    max: f64,
    count: usize,
}

impl MaxResidual {
    fn new(label: impl Into<String>, tol: f64) -> Self {
        Self {
            label: label.into(),
            tol,
            max: 0.0,
            count: 0,
        }
    }

    fn push(&mut self, value: f64) {
        self.count += 1;
        // NaN must fail, so it cannot be swallowed by f64::max.
        if value.is_nan() || value > self.max {
            self.max = value;
        }
    }

    fn finish(self) -> Check {
        Check::new(
            self.label,
            self.max <= self.tol,
            format!("max {:.3e} over {} cases (tol {:.0e})", self.max, self.count, self.tol),
        )
    }
}

/// Counts cases satisfying a predicate.
struct PassCount {
    label: String,
    passed: usize,
    total: usize,
    first_failure: Option<String>,
}

impl PassCount {
    fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            passed: 0,
            total: 0,
            first_failure: None,
        }
    }

    fn push(&mut self, ok: bool, context: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(context());
        }
    }

    fn finish(self) -> Check {
        let mut detail = format!("{}/{} cases", self.passed, self.total);
        if let Some(f) = self.first_failure {
            detail.push_str(&format!("; first failure: {f}"));
        }
        Check::new(self.label, self.passed == self.total, detail)
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn gaussian_vector(dim: usize, rng: &mut impl Rng) -> DenseVector {
    DenseVector::from_vec((0..dim).map(|_| rng.sample(StandardNormal)).collect())
}

fn random_subspace(ambient: usize, dim: usize, rng: &mut impl Rng) -> Result<Subspace, LinalgError> {
    Subspace::new(random_frame(ambient, dim, rng))
}

/// `rank`-`r` product of Gaussian factors, `r = 0` giving the zero matrix.
fn random_low_rank(rows: usize, cols: usize, r: usize, rng: &mut impl Rng) -> DenseMatrix {
    if r == 0 {
        return DenseMatrix::zeros(rows, cols);
    }
    gaussian(rows, r, rng).matmul(&gaussian(r, cols, rng))
}

fn penrose() -> Result<Vec<Check>, SuiteError> {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut axioms = [
        MaxResidual::new("AXA = A (relative)", TOL),
        MaxResidual::new("XAX = X (relative)", TOL),
        MaxResidual::new("(AX)^T = AX", TOL),
        MaxResidual::new("(XA)^T = XA", TOL),
    ];
    let mut deficient = 0;
    for _ in 0..50 {
        let rows = rng.random_range(1..=20);
        let cols = rng.random_range(1..=20);
        let full = rows.min(cols);
        let r = rng.random_range(0..=full);
        if r < full {
            deficient += 1;
        }
        let a = random_low_rank(rows, cols, r, &mut rng);
        let x = pseudo_inverse(&a, RankTol::Default)?;
        let ax = a.matmul(&x);
        let xa = x.matmul(&a);
        let rel = |m: &DenseMatrix, scale: f64| m.frobenius_norm() / scale.max(f64::MIN_POSITIVE);
        axioms[0].push(if r == 0 { ax.matmul(&a).max_abs() } else { rel(&(&ax.matmul(&a) - &a), a.frobenius_norm()) });
        axioms[1].push(if r == 0 { xa.matmul(&x).max_abs() } else { rel(&(&xa.matmul(&x) - &x), x.frobenius_norm()) });
        axioms[2].push((&ax - &ax.transpose()).frobenius_norm());
        axioms[3].push((&xa - &xa.transpose()).frobenius_norm());
    }
    let mut checks: Vec<Check> = axioms.into_iter().map(MaxResidual::finish).collect();
    checks.push(Check::new(
        "rank-deficient matrices covered",
        deficient >= 10,
        format!("{deficient} of 50"),
    ));
    Ok(checks)
}

fn projectors() -> Result<Vec<Check>, SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut idempotent = MaxResidual::new("|P^2 - P|", 1e-12);
    let mut symmetric = MaxResidual::new("|P - P^T|", 1e-12);
    let mut symmetry = MaxResidual::new("|gap(M,N) - gap(N,M)|", 1e-12);
    let mut self_gap = MaxResidual::new("gap(M,M)", 1e-12);
    let mut range = PassCount::new("gap in [0, 1]");
    let mut sin_gap = MaxResidual::new("sin(max canonical angle) = gap, equal dims in R^20", 1e-8);
    let mut delta = MaxResidual::new("gap = max(delta(M,N), delta(N,M))", 1e-10);
    let mut projector_pair = MaxResidual::new("|P - Q| = max(|(I-Q)P|, |(I-P)Q|)", 1e-10);

    for case in 0..40 {
        let ambient = if case < 20 { 20 } else { rng.random_range(2..=12) };
        let dm = rng.random_range(0..=ambient);
        let dn = if case < 20 { dm } else { rng.random_range(0..=ambient) };
        let m = random_subspace(ambient, dm, &mut rng)?;
        let n = random_subspace(ambient, dn, &mut rng)?;

        for s in [&m, &n] {
            let p = projector(s);
            idempotent.push((&p.matmul(&p) - &p).spectral_norm()?);
            symmetric.push((&p - &p.transpose()).max_abs());
        }
        let g = gap(&m, &n)?;
        symmetry.push((g - gap(&n, &m)?).abs());
        self_gap.push(gap(&m, &m)?);
        range.push((0.0..=1.0).contains(&g), || format!("case {case}: gap {g}"));

        if dm == dn && dm > 0 {
            let angles = canonical_angles(&m, &n)?;
            let largest = angles.last().copied().unwrap_or(0.0);
            sin_gap.push((largest.sin() - g).abs());
        }
        delta.push((g - directed_gap(&m, &n)?.max(directed_gap(&n, &m)?)).abs());

        let p = projector(&m);
        let q = projector(&n);
        let eye = DenseMatrix::identity(ambient);
        let lhs = (&p - &q).spectral_norm()?;
        let rhs = (&eye - &q)
            .matmul(&p)
            .spectral_norm()?
            .max((&eye - &p).matmul(&q).spectral_norm()?);
        projector_pair.push((lhs - rhs).abs());
    }
    Ok(vec![
        idempotent.finish(),
        symmetric.finish(),
        symmetry.finish(),
        self_gap.finish(),
        range.finish(),
        sin_gap.finish(),
        delta.finish(),
        projector_pair.finish(),
    ])
}

/// `S = A(BᵀA)⁻¹Bᵀ` for random full-rank `A, B ∈ ℝ^{d×k}`.
pub fn random_oblique_projector(d: usize, k: usize, rng: &mut impl Rng) -> Result<DenseMatrix, LinalgError> {
    let a = gaussian(d, k, rng);
    let b = gaussian(d, k, rng);
    let inner = pseudo_inverse(&b.transpose().matmul(&a), RankTol::Default)?;
    Ok(a.matmul(&inner).matmul(&b.transpose()))
}

fn oblique_norms() -> Result<Vec<Check>, SuiteError> {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut first = MaxResidual::new("|P_N(S) P_R(S)| = sqrt(1 - |S|^-2)", TOL);
    let mut second = MaxResidual::new("sqrt(1 - |S|^-2) = |P_R(S) - P_R(S*)|", TOL);
    let mut passes = PassCount::new("50 oblique projectors in R^6..R^12");
    for case in 0..50 {
        let d = rng.random_range(6..=12);
        let k = rng.random_range(1..d);
        let s = random_oblique_projector(d, k, &mut rng)?;
        let r = oblique_projector_norm_identity(&s, TOL)?;
        first.push((r.lhs - r.rhs).abs());
        second.push((r.rhs - r.range_gap).abs());
        passes.push(r.pass, || format!("case {case} (d={d}, k={k}): {r:?}"));
    }
    Ok(vec![first.finish(), second.finish(), passes.finish()])
}

fn random_family(kernel_dim: usize, kernel_support: Option<usize>, seed: u64) -> OperatorFamily {
    OperatorFamily::Random {
        kernel_dim,
        kernel_support,
        seed,
    }
}

fn offset_routes(tolerances: Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut routes = MaxResidual::new(
        "|sin theta (gap route) - sqrt(1 - |I - Q_n|^-2)| on seidman, du, random",
        tolerances.route_agreement,
    );
    let mut idempotence = PassCount::new("|Q_n^2 - Q_n| <= tol (1 + |Q_n|^2)");
    let mut necessary = PassCount::new("|I - Q_n| <= 1 + |T_n^+ T|");
    let mut factorization = MaxResidual::new("|Q_n - P_N(T)perp T_n^+ T| on random operators", 1e-7);

    let mut families = vec![OperatorFamily::Seidman, OperatorFamily::Du];
    families.extend((0..5).map(|seed| random_family(2, None, seed)));
    for family in &families {
        for n in [2, 4, 8, 16] {
            let inst = make_lpa(family, n, 4 * n, tolerances)?;
            let angle = inst.offset_angle()?;
            routes.push((angle.sin_gap_route - angle.sin_qn_route).abs());
            let (res, allowed) = inst.qn_idempotence()?;
            idempotence.push(res <= allowed, || format!("{} n={n}: {res:.3e} > {allowed:.3e}", family.name()));
            let q = inst.qn_matrix()?;
            let i_minus_q = (&DenseMatrix::identity(q.rows()) - &q).spectral_norm()?;
            let cap = 1.0 + inst.norm_tn_dag_t()?;
            necessary.push(i_minus_q <= cap * (1.0 + 1e-12), || {
                format!("{} n={n}: {i_minus_q:.6e} > {cap:.6e}", family.name())
            });
            if matches!(family, OperatorFamily::Random { .. }) {
                factorization.push(inst.qn_factorization_residual()?);
            }
        }
    }
    Ok(vec![
        routes.finish(),
        idempotence.finish(),
        necessary.finish(),
        factorization.finish(),
    ])
}

fn error_identity(tolerances: Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let mut identity = PassCount::new("T_n^+ y - T^+ y = (T_n^+ T - I)(I - P_n) T^+ y, 100 trials");
    let mut splitting = MaxResidual::new("|P_N(T_n) - (P_core + I - P_n)|", 1e-8);
    let mut membership = PassCount::new("T_n^+ y in X_n");
    for trial in 0..100u64 {
        let m = rng.random_range(6..=14);
        let kernel_dim = rng.random_range(0..m / 2);
        let support = if trial % 2 == 0 { Some(rng.random_range(kernel_dim.max(1)..=m)) } else { None };
        let n = rng.random_range(1..=m);
        let family = random_family(kernel_dim, support.filter(|&s| s >= kernel_dim), trial);
        let inst = make_lpa(&family, n, m, tolerances)?;
        let y = gaussian_vector(m, &mut rng);
        let r = inst.error_identity_check(&y)?;
        identity.push(r.pass, || format!("trial {trial}: {r:?}"));
        membership.push(inst.tn_pinv_apply(&y).is_ok(), || format!("trial {trial}"));
        if trial % 4 == 0 {
            splitting.push(inst.kernel_splitting_residual()?);
        }
    }
    Ok(vec![identity.finish(), splitting.finish(), membership.finish()])
}

fn bounds(tolerances: Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bound = PassCount::new("|T_n^+ y - T^+ y| <= sqrt(1 + tan^2 theta_n) dist(T^+ y, X_n), kernel in e1..e4");
    for pair in 0..100u64 {
        let family = random_family(2, Some(4), pair);
        let n = [4, 6, 8][(pair % 3) as usize];
        let inst = make_lpa(&family, n, 24, tolerances)?;
        let y = gaussian_vector(24, &mut rng);
        let r = inst.error_bound_check(&y)?;
        bound.push(r.pass, || format!("pair {pair}, n={n}: {r:?}"));
    }

    let mut refused = PassCount::new("bound refused below n* (kernel outside X_n)");
    for seed in 0..5 {
        let inst = make_lpa(&random_family(2, Some(8), seed), 3, 24, tolerances)?;
        let out = inst.error_bound_check(&DenseVector::basis(24, 0));
        refused.push(matches!(out, Err(AnalysisError::BoundNotAsserted { .. })), || format!("seed {seed}"));
    }

    let mut coercive = PassCount::new("sqrt(1 + tan^2 theta_n) <= beta/alpha for T = I + 0.5 skew");
    for seed in 0..10 {
        let t = identity_plus_skew(16, 0.5, seed);
        let beta = t.spectral_norm()?;
        let r = coercive_bound_check(&t, 1.0, beta, &[2, 4, 8], tolerances)?;
        coercive.push(r.pass(), || format!("seed {seed}: {:?}", r.rows));
    }
    Ok(vec![bound.finish(), refused.finish(), coercive.finish()])
}

fn seidman(tolerances: Tolerances) -> Result<Vec<Check>, SuiteError> {
    let ns = [8, 16, 32];
    let scan = kernel_approximability_scan(&OperatorFamily::Seidman, &ns, Truncation::Factor(4), tolerances)?;
    let mut checks = vec![Check::new(
        "kernel approximability holds (injective)",
        scan.holds && scan.rows.iter().all(|r| r.kernel_core_dim == 0 && r.kernel_dim == 0),
        format!("n* = {:?}", scan.n_star),
    )];

    let mut diags = Vec::new();
    for n in ns {
        diags.push(make_lpa(&OperatorFamily::Seidman, n, 4 * n, tolerances)?.diagnostics()?);
    }
    let sines: Vec<f64> = diags.iter().map(|d| d.sin_theta_gap).collect();
    checks.push(Check::new(
        "sin theta_n nondecreasing over even n",
        sines.windows(2).all(|w| w[1] >= w[0] - 1e-6),
        format!("{sines:.6?}"),
    ));
    let scaled: Vec<f64> = diags.iter().map(|d| (1.0 - d.sin_theta_gap.powi(2)) * d.n as f64).collect();
    checks.push(Check::new(
        "(1 - sin^2 theta_n) n <= 10",
        scaled.iter().all(|&v| v <= 10.0),
        format!("{scaled:.4?}"),
    ));
    let norms: Vec<f64> = diags.iter().map(|d| d.norm_tn_dag_t).collect();
    checks.push(Check::new(
        "|T_n^+ T| increasing",
        norms.windows(2).all(|w| w[1] > w[0]),
        format!("{norms:.4?}"),
    ));
    checks.push(Check::new(
        "|T_n^+ T| = sqrt(1 + tan^2 theta_n)",
        diags
            .iter()
            .all(|d| (d.norm_tn_dag_t - d.bound_factor).abs() <= 1e-6 * d.bound_factor),
        format!("{:.6?}", diags.iter().map(|d| d.bound_factor).collect::<Vec<_>>()),
    ));

    let mut zero_offset = PassCount::new("zero-offset conditions all false, witness T*T e1 not in X_n");
    for n in [2, 4, 8] {
        let r = make_lpa(&OperatorFamily::Seidman, n, 4 * n, tolerances)?.zero_offset_characterization()?;
        let ok = !r.theta_zero
            && !r.pinv_is_projected_pinv
            && !r.invariance_holds
            && r.witness.as_deref().is_some_and(|w| w.starts_with("T*T e1 "));
        zero_offset.push(ok, || format!("n={n}: {r:?}"));
    }
    checks.push(zero_offset.finish());
    Ok(checks)
}

/// The best-LPA family used by the `best` suite and its acceptance criterion.
pub fn best_lpa_family(seed: u64) -> OperatorFamily {
    OperatorFamily::BestLpa {
        system: SingularSystem::inverse_squares(12, 2).expect("valid singular system"),
        seed,
    }
}

fn best(tolerances: Tolerances) -> Result<Vec<Check>, SuiteError> {
    let family = best_lpa_family(0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut theta = MaxResidual::new("theta_n = 0", tolerances.theta_zero);
    let mut projected = MaxResidual::new("|K_n^+ y - P_n K^+ y| (relative)", 1e-8);
    let mut equality = MaxResidual::new("error bound lhs = rhs", 1e-8);
    let mut norm = MaxResidual::new("|K_n^+ K| = 1", 1e-8);
    let mut zero_offset = PassCount::new("zero-offset conditions all true");
    for n in 1..=12 {
        let inst: LpaInstance = make_lpa(&family, n, 20, tolerances)?;
        theta.push(inst.offset_angle()?.theta);
        let y = gaussian_vector(20, &mut rng);
        let direct = inst.tn_pinv_apply(&y)?;
        let t_dag_y = inst.t_pinv_apply(&y)?;
        let b = inst.x_n().basis();
        let via_projection = b.mul_vec(&b.tr_mul_vec(&t_dag_y));
        projected.push((&direct - &via_projection).norm() / (1.0 + t_dag_y.norm()));
        let r = inst.error_bound_check(&y)?;
        equality.push((r.lhs - r.rhs).abs());
        norm.push((inst.norm_tn_dag_t()? - 1.0).abs());
        let z = inst.zero_offset_characterization()?;
        zero_offset.push(
            z.theta_zero && z.pinv_is_projected_pinv && z.invariance_holds,
            || format!("n={n}: {z:?}"),
        );
    }
    Ok(vec![
        theta.finish(),
        projected.finish(),
        equality.finish(),
        norm.finish(),
        zero_offset.finish(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_lists_names() {
        let err = run_suite("bogus", Tolerances::default()).unwrap_err();
        let msg = err.to_string();
        for name in SUITES {
            assert!(msg.contains(name));
        }
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = MaxResidual::new("x", 1.0);
        r.push(0.5);
        r.push(f64::NAN);
        r.push(0.1);
        assert!(!r.finish().pass);
    }

    #[test]
    fn oblique_projector_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = random_oblique_projector(6, 2, &mut rng).unwrap();
        assert!((&s.matmul(&s) - &s).max_abs() < 1e-10);
    }
}
