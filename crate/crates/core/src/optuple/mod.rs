//! Commuting operator tuples `T = (T_1, ..., T_n)` on `C^d` and the
//! constructions attached to them: the completely positive map `sigma_T`,
//! defect operators, the operator `Delta_T`, the left inverse `L` of the row
//! operator, the wandering subspace, `H_infinity`, and the regularity probe.

mod identity;
mod model;
mod predicates;
mod regularity;
mod subspaces;

pub use identity::{ColumnL, DeltaSmall, IdentityCheck, LForm, RowDecomposition};
pub use model::{AnalyticModel, DomainRadius, ProjectionAtPoint};
pub use predicates::{CDot0, Predicates, Trivalent, C_DOT_0_BUDGET};
pub use regularity::{CodimSample, ProbeConfig, RegularityReport, RegularityVerdict, KOSZUL_BUDGET};
pub use subspaces::Chain;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::multiindex::{binomial_f64, MultiIndex};

/// Tolerance ladder shared by the numeric pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative singular value threshold for rank decisions.
    pub rank: f64,
    /// Relative commutator bound checked on construction.
    pub commute: f64,
    /// Operator identity and structural residuals.
    pub identity: f64,
    /// Gram comparisons.
    pub gram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank: 1e-10, commute: 1e-10, identity: 1e-9, gram: 1e-8 }
    }
}

/// A tuple of pairwise commuting `d x d` complex matrices.
#[derive(Debug, Clone)]
pub struct OperatorTuple {
    ops: Vec<CMatrix>,
    dim: usize,
    tol: Tolerances,
}

impl OperatorTuple {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerances(ops, Tolerances::default())
    }

    pub fn with_tolerances(ops: Vec<CMatrix>, tol: Tolerances) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidParameter("operator tuple must be non-empty".into()));
        };
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidParameter("operators must act on a non-zero space".into()));
        }
        for a in &ops {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.nrows().max(a.ncols()) });
            }
            linalg::check_finite(a)?;
        }
        let t = OperatorTuple { ops, dim, tol };
        for i in 0..t.n() {
            for j in (i + 1)..t.n() {
                let (a, b) = (&t.ops[i], &t.ops[j]);
                let residual = linalg::frobenius(&(a * b - b * a));
                let scale = (linalg::frobenius(a) * linalg::frobenius(b)).max(1.0);
                if residual > tol.commute * scale {
                    return Err(Error::NotCommuting { i, j, residual });
                }
            }
        }
        Ok(t)
    }

    pub fn zero(n: usize, d: usize) -> Self {
        OperatorTuple { ops: vec![linalg::zeros(d, d); n], dim: d, tol: Tolerances::default() }
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &CMatrix {
        &self.ops[i]
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn set_tolerances(&mut self, tol: Tolerances) {
        self.tol = tol;
    }

    /// Row operator `[T_1 ... T_n] : C^{nd} -> C^d`.
    pub fn row(&self) -> CMatrix {
        linalg::block_row(&self.ops)
    }

    /// `sigma_T(X) = sum_i T_i X T_i^*`.
    pub fn sigma(&self, x: &CMatrix) -> CMatrix {
        let mut out = linalg::zeros(self.dim, self.dim);
        for t in &self.ops {
            out += t * x * t.adjoint();
        }
        out
    }

    /// `[sigma^0(1), sigma^1(1), ..., sigma^k(1)]`.
    pub fn sigma_powers_of_identity(&self, k: usize) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(linalg::identity(self.dim));
        for j in 0..k {
            let next = self.sigma(&out[j]);
            out.push(next);
        }
        out
    }

    /// Defect operator `(I - sigma)^k (1) = sum_j (-1)^j C(k, j) sigma^j(1)`.
    pub fn defect(&self, k: usize) -> CMatrix {
        let powers = self.sigma_powers_of_identity(k);
        let mut out = linalg::zeros(self.dim, self.dim);
        for (j, p) in powers.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out += p * c(sign * binomial_f64(k, j), 0.0);
        }
        out
    }

    /// The same defect computed as `(I - sigma)` applied `k` times to the identity.
    pub fn defect_by_composition(&self, k: usize) -> CMatrix {
        let mut x = linalg::identity(self.dim);
        for _ in 0..k {
            x = &x - self.sigma(&x);
        }
        x
    }

    /// `Delta_T = sum_{j < m} (-1)^j C(m, j+1) sigma^j(1)`.
    pub fn delta_cap(&self, m: usize) -> CMatrix {
        assert!(m >= 1, "m must be positive");
        let powers = self.sigma_powers_of_identity(m - 1);
        let mut out = linalg::zeros(self.dim, self.dim);
        for (j, p) in powers.iter().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out += p * c(sign * binomial_f64(m, j + 1), 0.0);
        }
        out
    }

    /// `T^alpha = T_1^{alpha_1} ... T_n^{alpha_n}`.
    pub fn power(&self, alpha: &MultiIndex) -> CMatrix {
        let mut out = linalg::identity(self.dim);
        for (i, &a) in alpha.entries().iter().enumerate() {
            for _ in 0..a {
                out = &out * &self.ops[i];
            }
        }
        out
    }

    /// `T^{*alpha} = (T^alpha)^*`.
    pub fn adjoint_power(&self, alpha: &MultiIndex) -> CMatrix {
        self.power(alpha).adjoint()
    }

    /// Product `T_{w_1} T_{w_2} ... T_{w_k}`.
    pub fn word(&self, w: &[usize]) -> CMatrix {
        w.iter().fold(linalg::identity(self.dim), |acc, &i| acc * &self.ops[i])
    }

    /// Orthogonal direct sum `T ⊕ S`.
    pub fn direct_sum(&self, other: &OperatorTuple) -> Result<OperatorTuple> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        let ops = self
            .ops
            .iter()
            .zip(&other.ops)
            .map(|(a, b)| linalg::block_diag(&[a.clone(), b.clone()]))
            .collect();
        OperatorTuple::with_tolerances(ops, self.tol)
    }

    /// `(U T_1 U^*, ..., U T_n U^*)` for a unitary `U`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<OperatorTuple> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.nrows() });
        }
        let ops = self.ops.iter().map(|t| u * t * u.adjoint()).collect();
        OperatorTuple::with_tolerances(ops, self.tol)
    }

    /// The adjoint tuple `(T_1^*, ..., T_n^*)`.
    pub fn adjoint(&self) -> OperatorTuple {
        OperatorTuple { ops: self.ops.iter().map(|t| t.adjoint()).collect(), dim: self.dim, tol: self.tol }
    }
}
