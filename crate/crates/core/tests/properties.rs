use lpa_core::analysis::make_lpa;
use lpa_core::gallery::{random_frame, OperatorFamily, Truncation};
use lpa_core::linalg::{
    canonical_angles, directed_gap, gap, oblique_projector_norm_identity, projector, pseudo_inverse,
};
use lpa_core::{DenseMatrix, DenseVector, RankTol, Subspace, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A `rows × cols` matrix of rank at most `rank`, as a product of bounded factors.
fn low_rank_matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..=10, 1usize..=10)
        .prop_flat_map(|(rows, cols)| (Just(rows), Just(cols), 0..=rows.min(cols)))
        .prop_flat_map(|(rows, cols, rank)| {
            (
                proptest::collection::vec(-1.0f64..1.0, rows * rank),
                proptest::collection::vec(-1.0f64..1.0, rank * cols),
                Just((rows, cols, rank)),
            )
        })
        .prop_map(|(l, r, (rows, cols, rank))| {
            let left = DenseMatrix::new(rows, rank, l).unwrap();
            let right = DenseMatrix::new(rank, cols, r).unwrap();
            left.matmul(&right)
        })
}

fn subspace(ambient: usize, dim: usize, seed: u64) -> Subspace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Subspace::new(random_frame(ambient, dim, &mut rng)).unwrap()
}

/// Two random subspaces of a common ambient space.
fn subspace_pair() -> impl Strategy<Value = (Subspace, Subspace)> {
    (1usize..=10)
        .prop_flat_map(|d| (Just(d), 0..=d, 0..=d, any::<u64>()))
        .prop_map(|(d, a, b, seed)| (subspace(d, a, seed), subspace(d, b, seed ^ 0x9e37)))
}

fn frob(a: &DenseMatrix) -> f64 {
    a.frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn penrose_axioms(a in low_rank_matrix()) {
        let x = pseudo_inverse(&a, RankTol::Default).unwrap();
        let ax = a.matmul(&x);
        let xa = x.matmul(&a);
        let na = frob(&a);
        let nx = frob(&x);
        prop_assert!(frob(&(&ax.matmul(&a) - &a)) <= 1e-9 * na.max(1e-300));
        prop_assert!(frob(&(&xa.matmul(&x) - &x)) <= 1e-9 * nx.max(1e-300));
        prop_assert!(frob(&(&ax - &ax.transpose())) <= 1e-9);
        prop_assert!(frob(&(&xa - &xa.transpose())) <= 1e-9);
    }

    #[test]
    fn projectors_are_orthogonal_idempotents((m, _n) in subspace_pair()) {
        let p = projector(&m);
        prop_assert!((&p.matmul(&p) - &p).max_abs() <= 1e-12);
        prop_assert!((&p - &p.transpose()).max_abs() <= 1e-12);
    }

    #[test]
    fn gap_is_a_symmetric_distance((m, n) in subspace_pair()) {
        let g = gap(&m, &n).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!((g - gap(&n, &m).unwrap()).abs() <= 1e-12);
        prop_assert!(gap(&m, &m).unwrap() <= 1e-12);
    }

    #[test]
    fn gap_is_the_larger_directed_gap((m, n) in subspace_pair()) {
        let g = gap(&m, &n).unwrap();
        let d = directed_gap(&m, &n).unwrap().max(directed_gap(&n, &m).unwrap());
        prop_assert!((g - d).abs() <= 1e-10, "gap {g} vs max delta {d}");
    }

    #[test]
    fn unequal_dimensions_have_unit_gap((m, n) in subspace_pair()) {
        prop_assume!(m.dim() != n.dim());
        prop_assert!((gap(&m, &n).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn sine_of_largest_angle_is_the_gap(d in 1usize..=20, k in 1usize..=20, seed in any::<u64>()) {
        let k = k.min(d);
        let m = subspace(d, k, seed);
        let n = subspace(d, k, seed.wrapping_add(1));
        let angles = canonical_angles(&m, &n).unwrap();
        let largest = angles.last().copied().unwrap();
        prop_assert!(angles.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((largest.sin() - gap(&m, &n).unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn oblique_projector_norms(d in 2usize..=10, k in 1usize..=9, seed in any::<u64>()) {
        let k = k.min(d - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_frame(d, k, &mut rng);
        let b = random_frame(d, k, &mut rng);
        let bta = b.transpose().matmul(&a);
        // Nearly singular BᵀA makes S arbitrarily large; keep the case well posed.
        let smallest = lpa_core::linalg::singular_values(&bta).unwrap().last().copied().unwrap();
        prop_assume!(smallest > 1e-3);
        let s = a.matmul(&pseudo_inverse(&bta, RankTol::Default).unwrap()).matmul(&b.transpose());
        let r = oblique_projector_norm_identity(&s, 1e-8).unwrap();
        prop_assert!(r.pass, "{r:?}");
        prop_assert!(r.norm_s >= 1.0 - 1e-12);
    }

    #[test]
    fn error_identity_for_any_right_hand_side(
        seed in 0u64..1000,
        kernel_dim in 0usize..4,
        n in 1usize..=12,
        y in proptest::collection::vec(-10.0f64..10.0, 12),
    ) {
        let family = OperatorFamily::Random { kernel_dim, kernel_support: None, seed };
        let inst = make_lpa(&family, n, 12, Tolerances::default()).unwrap();
        let r = inst.error_identity_check(&DenseVector::from_vec(y)).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn lpa_structure(seed in 0u64..1000, kernel_dim in 0usize..4, n in 1usize..=12) {
        let family = OperatorFamily::Random { kernel_dim, kernel_support: None, seed };
        let inst = make_lpa(&family, n, 12, Tolerances::default()).unwrap();
        let (res, allowed) = inst.qn_idempotence().unwrap();
        prop_assert!(res <= allowed);
        prop_assert!(inst.kernel_splitting_residual().unwrap() <= 1e-8);
        let angle = inst.offset_angle().unwrap();
        prop_assert!((angle.sin_gap_route - angle.sin_qn_route).abs() <= 1e-6, "{angle:?}");
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&angle.theta));
        let d = inst.diagnostics().unwrap();
        prop_assert!(d.kernel_core_dim <= d.kernel_dim);
        prop_assert!(d.bound_factor >= 1.0);
    }

    #[test]
    fn truncation_rules_round_trip(k in 1usize..50, m in 1usize..500, n in 1usize..100) {
        for rule in [Truncation::Auto, Truncation::Factor(k), Truncation::Fixed(m)] {
            let parsed: Truncation = rule.to_string().parse().unwrap();
            prop_assert_eq!(parsed, rule);
        }
        prop_assert!(Truncation::Auto.m_for(n) >= n);
        prop_assert_eq!(Truncation::Factor(k).m_for(n), k * n);
    }
}
