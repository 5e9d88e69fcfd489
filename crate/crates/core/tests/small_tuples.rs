//! Searches over small tuples and the compression picture of the wandering subspace.

use bergman_wold::bergman::TruncatedBergman;
use bergman_wold::cli::builders::spherical_coisometry_random;
use bergman_wold::linalg::{self, c, CMatrix};
use bergman_wold::wold::{
    annihilator_subspace, decompose, intertwining_residual, v_coefficients, CoefficientMode, Verdict, WoldConfig,
};
use bergman_wold::OperatorTuple;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(r, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Single operators on C^2 or C^3 of rank `d - 1`, scaled to norm `scale`.
fn singular_contraction(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> OperatorTuple {
    let a = gaussian(rng, d, d - 1) * gaussian(rng, d - 1, d);
    let norm = linalg::spectral_norm(&a).unwrap();
    OperatorTuple::new(vec![a * c(scale / norm, 0.0)]).unwrap()
}

/// How the model of the orbit of the wandering subspace breaks, if it does.
fn breakdown(t: &OperatorTuple) -> Option<String> {
    let rep = decompose(t, &WoldConfig::new(1)).unwrap();
    let tol = t.tolerances();
    let coeffs = v_coefficients(t, 1, t.dim(), CoefficientMode::General).unwrap();
    let inter = intertwining_residual(t, &coeffs).unwrap();
    if rep.dims.h_inf + rep.dims.orbit != t.dim() {
        Some(format!("dims {} + {} != {}", rep.dims.h_inf, rep.dims.orbit, t.dim()))
    } else if rep.residuals.gram > tol.gram {
        Some(format!("gram residual {:e}", rep.residuals.gram))
    } else if inter > tol.identity {
        Some(format!("intertwining residual {inter:e}"))
    } else {
        None
    }
}

#[test]
fn random_small_tuples_exhibit_failed_decompositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut found = 0;
    for trial in 0..120 {
        let d = 2 + trial % 2;
        let scale = 0.3 + 0.7 * rng.random::<f64>();
        let t = singular_contraction(&mut rng, d, scale);
        let rep = decompose(&t, &WoldConfig::new(1)).unwrap();
        if let Some(why) = breakdown(&t) {
            found += 1;
            assert_ne!(rep.verdict, Verdict::Consistent, "trial {trial}: {why}");
        }
    }
    assert!(found > 0, "no failing example among 120 trials");
}

#[test]
fn consistent_verdicts_carry_a_valid_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut consistent = 0;
    for trial in 0..40u64 {
        let d = 2 + (trial % 2) as usize;
        let t = if trial % 3 == 0 {
            singular_contraction(&mut rng, d, 1.0)
        } else {
            OperatorTuple::new(spherical_coisometry_random(d, 1, trial).unwrap()).unwrap()
        };
        if decompose(&t, &WoldConfig::new(1)).unwrap().verdict == Verdict::Consistent {
            consistent += 1;
            assert!(breakdown(&t).is_none(), "trial {trial}");
        }
    }
    assert!(consistent >= 20);
}

/// The wandering subspace of `T` equals that of the compression of `T` to
/// the orthogonal complement of `Ker V`.
#[test]
fn wandering_subspace_survives_compression() {
    for (k, n, m, big_n, fiber, seed) in [(2, 2, 1, 3, 1, 1u64), (3, 2, 2, 4, 2, 2), (1, 3, 1, 2, 1, 3), (2, 1, 3, 5, 2, 4)] {
        let s = OperatorTuple::new(spherical_coisometry_random(k, n, seed).unwrap()).unwrap();
        let b = TruncatedBergman::new(n, m, big_n, fiber).unwrap();
        let t = s.direct_sum(&b.mult_tuple()).unwrap();
        assert!(t.satisfies_identity(m).unwrap().holds);

        let ker_v = annihilator_subspace(&t, big_n + 1).unwrap();
        let q = ker_v.ortho_complement().unwrap();
        let frame = q.frame();
        let compressed: Vec<CMatrix> = t.ops().iter().map(|op| frame.adjoint() * op * frame).collect();
        let c_tuple = OperatorTuple::new(compressed).unwrap();
        let inner = c_tuple.wandering().unwrap();
        let lifted = linalg::orthonormal_frame(&(frame * inner.frame()), 1e-10).unwrap();

        let w = t.wandering().unwrap();
        assert_eq!(w.dim(), fiber);
        assert_eq!(lifted.dim(), w.dim());
        let sines = w.principal_angle_sines(&lifted).unwrap().unwrap();
        assert!(sines.iter().all(|&x| x < 1e-9), "k={k} n={n}: {sines:?}");
    }
}
