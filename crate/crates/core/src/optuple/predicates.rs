use serde::Serialize;

use super::OperatorTuple;
use crate::error::Result;
use crate::linalg::{self, CMatrix};

/// Iteration budget for `sigma^k(1)`.
pub const C_DOT_0_BUDGET: usize = 200;
const ZERO_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-12;
const STATIONARY_RUN: usize = 5;
const LIMIT_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trivalent {
    True,
    False,
    Inconclusive,
}

impl From<bool> for Trivalent {
    fn from(b: bool) -> Self {
        if b {
            Trivalent::True
        } else {
            Trivalent::False
        }
    }
}

/// Outcome of iterating `sigma^k(1)`.
#[derive(Debug, Clone)]
pub struct CDot0 {
    pub verdict: Trivalent,
    pub iterations: usize,
    /// The strong limit `S_infinity = lim sigma^k(1)` when the sequence settled.
    pub limit: Option<CMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Predicates {
    pub row_contraction: bool,
    pub row_partial_isometry: bool,
    pub spherical_isometry: bool,
    pub spherical_coisometry: bool,
    pub c_dot_0: Trivalent,
    pub row_norm: f64,
    pub partial_isometry_residual: f64,
    pub isometry_residual: f64,
    pub coisometry_residual: f64,
    pub c_dot_0_iterations: usize,
}

impl OperatorTuple {
    pub fn is_row_contraction(&self) -> Result<bool> {
        Ok(linalg::spectral_norm(&self.row())? <= 1.0 + self.tol.identity)
    }

    /// `sigma^k(1) -> 0` strongly.
    pub fn c_dot_0(&self) -> CDot0 {
        let mut x = linalg::identity(self.dim);
        let mut run = 0;
        for k in 0..C_DOT_0_BUDGET {
            if linalg::frobenius(&x) < ZERO_TOL {
                return CDot0 { verdict: Trivalent::True, iterations: k, limit: Some(linalg::zeros(self.dim, self.dim)) };
            }
            let next = self.sigma(&x);
            if !next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return CDot0 { verdict: Trivalent::Inconclusive, iterations: k + 1, limit: None };
            }
            run = if linalg::frobenius(&(&next - &x)) < STATIONARY_TOL { run + 1 } else { 0 };
            x = next;
            if run >= STATIONARY_RUN {
                let verdict = (linalg::frobenius(&x) < LIMIT_ZERO_TOL).into();
                return CDot0 { verdict, iterations: k + 1, limit: Some(x) };
            }
        }
        CDot0 { verdict: Trivalent::Inconclusive, iterations: C_DOT_0_BUDGET, limit: None }
    }

    pub fn predicates(&self) -> Result<(Predicates, CDot0)> {
        let row = self.row();
        let row_norm = linalg::spectral_norm(&row)?;
        let partial_isometry_residual = linalg::spectral_norm(&(&row * row.adjoint() * &row - &row))?;
        let mut tt = linalg::zeros(self.dim, self.dim);
        for t in &self.ops {
            tt += t.adjoint() * t;
        }
        let id = linalg::identity(self.dim);
        let isometry_residual = linalg::spectral_norm(&(tt - &id))?;
        let coisometry_residual = linalg::spectral_norm(&(self.sigma(&id) - &id))?;
        let c0 = self.c_dot_0();
        let tol = self.tol.identity;
        let p = Predicates {
            row_contraction: row_norm <= 1.0 + tol,
            row_partial_isometry: partial_isometry_residual <= tol,
            spherical_isometry: isometry_residual <= tol,
            spherical_coisometry: coisometry_residual <= tol,
            c_dot_0: c0.verdict,
            row_norm,
            partial_isometry_residual,
            isometry_residual,
            coisometry_residual,
            c_dot_0_iterations: c0.iterations,
        };
        Ok((p, c0))
    }
}
