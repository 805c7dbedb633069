//! Cross-checks against nalgebra and against closed forms computed here from
//! scratch.

use lpa_core::analysis::{du_divergence_check, make_lpa};
use lpa_core::gallery::{du, du_bad_y, du_vector_e, random_finite_kernel, seidman, OperatorFamily};
use lpa_core::linalg::{pseudo_inverse, singular_values};
use lpa_core::{DenseMatrix, DenseVector, RankTol, Tolerances};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, j))
}

fn random_matrix(rows: usize, cols: usize, rank: usize, rng: &mut impl Rng) -> DenseMatrix {
    let left = DenseMatrix::from_fn(rows, rank, |_, _| rng.random_range(-1.0..1.0));
    let right = DenseMatrix::from_fn(rank, cols, |_, _| rng.random_range(-1.0..1.0));
    left.matmul(&right)
}

/// Orthonormal basis of the column space via nalgebra's SVD.
fn na_range(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let cutoff = smax * 1e-10;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    DMatrix::from_fn(a.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

fn na_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).singular_values().max().min(1.0)
}

#[test]
fn singular_values_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let rows = rng.random_range(1..=15);
        let cols = rng.random_range(1..=15);
        let rank = rng.random_range(1..=rows.min(cols));
        let a = random_matrix(rows, cols, rank, &mut rng);
        let ours = singular_values(&a).unwrap();
        let mut theirs: Vec<f64> = to_na(&a).singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        assert_eq!(ours.len(), theirs.len());
        let scale = theirs[0].max(1.0);
        for (s, t) in ours.iter().zip(&theirs) {
            assert!((s - t).abs() <= 1e-12 * scale, "{ours:?} vs {theirs:?}");
        }
    }
}

#[test]
fn pseudo_inverse_matches_nalgebra_on_rank_deficient_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let rows = rng.random_range(2..=12);
        let cols = rng.random_range(2..=12);
        let rank = rng.random_range(1..rows.min(cols));
        let a = random_matrix(rows, cols, rank, &mut rng);
        let ours = pseudo_inverse(&a, RankTol::Default).unwrap();
        let theirs = to_na(&a).pseudo_inverse(1e-10).unwrap();
        let diff = (to_na(&ours) - &theirs).norm() / theirs.norm();
        assert!(diff < 1e-8, "relative difference {diff:e}");
    }
}

#[test]
fn lpa_solution_is_min_norm_least_squares() {
    for seed in 0..10 {
        let m = 12;
        for n in [3, 6, 9] {
            let family = OperatorFamily::Random {
                kernel_dim: 2,
                kernel_support: None,
                seed,
            };
            let inst = make_lpa(&family, n, m, Tolerances::default()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let y = DenseVector::from_vec((0..m).map(|_| rng.random_range(-1.0..1.0)).collect());
            let ours = inst.tn_pinv_apply(&y).unwrap();

            // min ‖x‖ subject to x minimizing ‖T·P·x − y‖
            let tn = to_na(inst.t()) * to_na(&inst.projector_x());
            let theirs = tn
                .svd(true, true)
                .solve(&DVector::from_column_slice(y.as_slice()), 1e-10)
                .unwrap();
            let diff = (DVector::from_column_slice(ours.as_slice()) - &theirs).norm();
            assert!(diff <= 1e-8 * (1.0 + theirs.norm()), "seed {seed} n {n}: {diff:e}");
        }
    }
}

#[test]
fn random_finite_kernel_has_requested_nullity() {
    for seed in 0..10 {
        let t = random_finite_kernel(10, 3, seed).unwrap();
        let svd = to_na(&t).singular_values();
        let zeros = svd.iter().filter(|&&s| s < 1e-10).count();
        assert_eq!(zeros, 3);
        assert!(svd.iter().filter(|&&s| s >= 1e-10).all(|&s| s >= 0.1 - 1e-12));
    }
}

/// `sin θₙ` recomputed with nalgebra: the gap between the ranges of `T†T·P`
/// and `TᵀT·P` for `P` the projector onto the first `n` coordinates.
fn seidman_sin_theta_oracle(n: usize, m: usize) -> f64 {
    let t = to_na(&seidman(m));
    let p = DMatrix::from_fn(m, m, |i, j| if i == j && i < n { 1.0 } else { 0.0 });
    let t_dag_t = t.clone().pseudo_inverse(1e-14).unwrap() * &t;
    let gram = t.transpose() * &t;
    na_gap(&na_range(&(t_dag_t * &p)), &na_range(&(gram * &p)))
}

#[test]
fn seidman_offset_angle_matches_oracle() {
    let tol = Tolerances::default();
    for n in [2, 4, 8, 16] {
        let inst = make_lpa(&OperatorFamily::Seidman, n, 4 * n, tol).unwrap();
        let ours = inst.offset_angle().unwrap().sin_gap_route;
        let oracle = seidman_sin_theta_oracle(n, 4 * n);
        assert!((ours - oracle).abs() < 1e-6, "n={n}: {ours} vs {oracle}");
    }
}

#[test]
fn seidman_frozen_values() {
    // Produced by `seidman_sin_theta_oracle` at m = 4n.
    let frozen = [(8, 0.773725), (16, 0.914472), (32, 0.974195)];
    let tol = Tolerances::default();
    for (n, expected) in frozen {
        let oracle = seidman_sin_theta_oracle(n, 4 * n);
        assert!((oracle - expected).abs() < 1e-6, "oracle n={n}: {oracle}");
        let ours = make_lpa(&OperatorFamily::Seidman, n, 4 * n, tol)
            .unwrap()
            .offset_angle()
            .unwrap()
            .sin_gap_route;
        assert!((ours - expected).abs() < 1e-6, "n={n}: {ours}");
    }
}

#[test]
fn du_coefficient_matches_geometric_series() {
    // cₙ = 4ⁿ Σ_{k>n} y_k e_k with y_k = √3(2⁻ᵏ − 4⁻ᵏ), e_k = √3·2⁻ᵏ (1-based).
    let series = |n: i32| -> f64 {
        (n + 1..200)
            .map(|k| 3.0 * (0.5f64.powi(k) - 0.25f64.powi(k)) * 0.5f64.powi(k))
            .sum::<f64>()
            * 4f64.powi(n)
    };
    let report = du_divergence_check(20, Tolerances::default()).unwrap();
    for row in &report.rows {
        let n = row.n as i32;
        let closed = 1.0 - (3.0 / 7.0) * 0.5f64.powi(n);
        assert!((series(n) - closed).abs() < 1e-12, "series n={n}");
        assert!((row.coefficient - closed).abs() < 1e-9, "n={n}: {}", row.coefficient);
    }
    let inner: f64 = (1..200)
        .map(|k| 3.0 * (0.5f64.powi(k) - 0.25f64.powi(k)) * 0.5f64.powi(k))
        .sum();
    assert!((inner - 4.0 / 7.0).abs() < 1e-15);
}

#[test]
fn du_gallery_vectors_match_series_terms() {
    let m = 30;
    let e = du_vector_e(m);
    let y = du_bad_y(m);
    for k in 1..=m {
        let i = k - 1;
        let two = 0.5f64.powi(k as i32);
        assert!((e.as_slice()[i] - 3f64.sqrt() * two).abs() < 1e-15);
        assert!((y.as_slice()[i] - 3f64.sqrt() * (two - two * two)).abs() < 1e-15);
    }
    // e spans the kernel; truncating the series Σ 4^-(j+1) leaves T e = 4^-m e.
    let te = du(m).mul_vec(&e);
    let expected = e.scale(0.25f64.powi(m as i32));
    assert!((&te - &expected).norm() < 1e-15);
}
