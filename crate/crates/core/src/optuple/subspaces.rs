use serde::Serialize;

use super::OperatorTuple;
use crate::error::{Error, Result};
use crate::linalg::{self, Subspace};

/// Result of a monotone subspace iteration.
#[derive(Debug, Clone)]
pub struct Chain {
    pub subspace: Subspace,
    /// Dimensions of the iterates, starting from the initial subspace.
    pub dims: Vec<usize>,
    /// First `k` at which the iteration stopped changing.
    pub stabilization_index: usize,
}

#[derive(Serialize)]
struct ChainSummary<'a> {
    dim: usize,
    dims: &'a [usize],
    stabilization_index: usize,
}

impl Serialize for Chain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChainSummary { dim: self.subspace.dim(), dims: &self.dims, stabilization_index: self.stabilization_index }
            .serialize(s)
    }
}

impl OperatorTuple {
    /// `W(T) = C^d ⊖ sum_i T_i C^d`.
    pub fn wandering(&self) -> Result<Subspace> {
        self.row_decomposition()?.range.ortho_complement()
    }

    /// Image of a subspace under the row: `sum_i T_i S`.
    fn push_forward(&self, s: &Subspace) -> Result<Subspace> {
        if s.dim() == 0 {
            return Ok(Subspace::zero(self.dim).with_tol(self.tol.rank));
        }
        let images: Vec<_> = self.ops.iter().map(|t| t * s.frame()).collect();
        let scale = self.ops.iter().map(linalg::frobenius).fold(0.0, f64::max);
        linalg::orthonormal_frame_scaled(&linalg::block_row(&images), self.tol.rank, scale)
    }

    /// `H_infinity = ∩_k sum_{|alpha| = k} T^alpha C^d`, by iterating
    /// `S_{k+1} = sum_i T_i S_k` from `S_0 = C^d` until the dimension stalls.
    pub fn h_infinity(&self) -> Result<Chain> {
        let budget = 4 * self.dim + 4;
        let mut current = Subspace::full(self.dim).with_tol(self.tol.rank);
        let mut dims = vec![current.dim()];
        for k in 0..budget {
            let next = self.push_forward(&current)?;
            dims.push(next.dim());
            if next.dim() == current.dim() {
                return Ok(Chain { subspace: current, dims, stabilization_index: k });
            }
            current = next;
        }
        Err(Error::BudgetExceeded { what: "H_infinity iteration", limit: budget })
    }

    /// Smallest `T`-invariant subspace containing `seed`:
    /// `[seed] = span { T^alpha x : x in seed }`.
    pub fn orbit_span(&self, seed: &Subspace) -> Result<Chain> {
        if seed.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: seed.ambient_dim() });
        }
        let budget = self.dim + 2;
        let mut span = seed.clone();
        let mut layer = seed.clone();
        let mut dims = vec![span.dim()];
        for k in 0..budget {
            layer = self.push_forward(&layer)?;
            let next = span.sum(&layer)?;
            dims.push(next.dim());
            if next.dim() == span.dim() {
                return Ok(Chain { subspace: span, dims, stabilization_index: k });
            }
            span = next;
        }
        Err(Error::BudgetExceeded { what: "orbit iteration", limit: budget })
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::linalg::testing::*;
    use proptest::prelude::*;

    #[test]
    fn jordan_subspaces() {
        let j = jordan(3);
        let w = j.wandering().unwrap();
        assert_eq!(w.dim(), 1);
        assert!((w.frame()[(0, 0)].norm() - 1.0).abs() < 1e-12);
        let h = j.h_infinity().unwrap();
        assert_eq!(h.subspace.dim(), 0);
        assert_eq!(h.dims, vec![3, 2, 1, 0, 0]);
        let orbit = j.orbit_span(&w).unwrap();
        assert_eq!(orbit.subspace.dim(), 3);
    }

    #[test]
    fn coisometry_is_all_h_infinity() {
        let mut r = rng(31);
        let t = spherical_coisometry(&mut r, 4, 3);
        assert_eq!(t.wandering().unwrap().dim(), 0);
        let h = t.h_infinity().unwrap();
        assert_eq!(h.subspace.dim(), 4);
        assert_eq!(h.stabilization_index, 0);
    }

    #[test]
    fn zero_tuple_is_all_wandering() {
        let z = OperatorTuple::zero(2, 3);
        assert_eq!(z.wandering().unwrap().dim(), 3);
        assert_eq!(z.h_infinity().unwrap().subspace.dim(), 0);
    }

    #[test]
    fn orbit_checks_dimension() {
        let j = jordan(3);
        assert!(j.orbit_span(&Subspace::full(2)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn h_infinity_is_invariant(seed in any::<u64>(), n in 1usize..3, d in 1usize..6, k in 0usize..4) {
            let mut r = rng(seed);
            let s = spherical_coisometry(&mut r, d, n);
            let t = s.direct_sum(&OperatorTuple::zero(n, k + 1)).unwrap();
            let h = t.h_infinity().unwrap();
            prop_assert_eq!(h.subspace.dim(), d);
            for op in t.ops() {
                prop_assert!(h.subspace.invariance_residual(op).unwrap() < 1e-9);
                prop_assert!(h.subspace.invariance_residual(&op.adjoint()).unwrap() < 1e-9);
            }
        }

        #[test]
        fn orbit_is_invariant(seed in any::<u64>(), n in 1usize..3, d in 1usize..6) {
            let mut r = rng(seed);
            let t = random_commuting(&mut r, n, d, 0.9);
            let x = random_matrix(&mut r, d, 1);
            let s = linalg::orthonormal_frame(&x, 1e-10).unwrap();
            let orbit = t.orbit_span(&s).unwrap();
            for op in t.ops() {
                prop_assert!(orbit.subspace.invariance_residual(op).unwrap() < 1e-8);
            }
        }
    }
}
