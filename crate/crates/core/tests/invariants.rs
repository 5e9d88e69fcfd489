use bergman_wold::bergman::TruncatedBergman;
use bergman_wold::cli::builders::{random_commuting, spherical_coisometry_random};
use bergman_wold::identities::{verify_weighted_binomial, verify_reciprocal, verify_rho_factorization};
use bergman_wold::linalg::{self, c, CMatrix};
use bergman_wold::multiindex::MultiIndex;
use bergman_wold::wold::{decompose, WoldConfig};
use bergman_wold::{Exec, OperatorTuple};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn unitary(seed: u64, d: usize) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    g.qr().q()
}

fn commuting(seed: u64, n: usize, d: usize, scale: f64) -> OperatorTuple {
    OperatorTuple::new(random_commuting(n, d, seed, scale).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..3, d in 2usize..6, m in 1usize..3) {
        let t = commuting(seed, n, d, 0.9);
        let u = unitary(seed ^ 0xabc, d);
        let s = t.conjugate(&u).unwrap();
        let a = decompose(&t, &WoldConfig::new(m)).unwrap();
        let b = decompose(&s, &WoldConfig::new(m)).unwrap();
        prop_assert_eq!(a.dims.h_inf, b.dims.h_inf);
        prop_assert_eq!(a.dims.orbit, b.dims.orbit);
        prop_assert_eq!(a.predicates.row_contraction, b.predicates.row_contraction);
        prop_assert!((a.residuals.identity - b.residuals.identity).abs() <= 1e-9 * (1.0 + a.residuals.identity));
    }

    #[test]
    fn direct_sums_add_dimensions(seed in any::<u64>(), k in 1usize..5, n in 1usize..3, m in 1usize..4, big_n in 1usize..5) {
        let s = OperatorTuple::new(spherical_coisometry_random(k, n, seed).unwrap()).unwrap();
        let b = TruncatedBergman::new(n, m, big_n, 1).unwrap();
        let t = s.direct_sum(&b.mult_tuple()).unwrap();
        let rep = decompose(&t, &WoldConfig::new(m)).unwrap();
        prop_assert_eq!(rep.dims.h_inf, k);
        prop_assert_eq!(rep.dims.orbit, b.dim());
        prop_assert_eq!(rep.dims.wandering, 1);
        prop_assert!(rep.residuals.orthogonality <= 1e-9);
    }

    #[test]
    fn sequential_and_parallel_agree(seed in any::<u64>(), d in 2usize..6) {
        let t = commuting(seed, 2, d, 0.8);
        let mut cfg = WoldConfig::new(2);
        cfg.exec = Exec::Sequential;
        let a = decompose(&t, &cfg).unwrap();
        cfg.exec = Exec::Parallel;
        let b = decompose(&t, &cfg).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.residuals.gram.to_bits(), b.residuals.gram.to_bits());
    }

    #[test]
    fn defect_forms_agree(seed in any::<u64>(), n in 1usize..4, d in 1usize..6, k in 0usize..5) {
        let t = commuting(seed, n, d, 0.95);
        let diff = t.defect(k) - t.defect_by_composition(k);
        prop_assert!(linalg::frobenius(&diff) <= 1e-12 * 2f64.powi(k as i32));
    }

    #[test]
    fn row_contractions_have_positive_first_defect(seed in any::<u64>(), n in 1usize..4, d in 1usize..6, scale in 0.0f64..1.0) {
        let t = commuting(seed, n, d, scale);
        prop_assert!(t.is_row_contraction().unwrap());
        prop_assert!(linalg::min_eigenvalue(&t.defect(1)).unwrap() >= -1e-12);
    }

    #[test]
    fn exact_identities_hold_beyond_the_sweep_grid(m in 1usize..9, entries in prop::collection::vec(0usize..5, 1..5)) {
        let alpha = MultiIndex::new(entries);
        prop_assert!(verify_weighted_binomial(m, alpha.n(), &alpha));
        prop_assert!(verify_rho_factorization(m, &alpha));
        prop_assert!(verify_reciprocal(m, 12));
    }
}
