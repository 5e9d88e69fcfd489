use num_complex::Complex64;
use serde::Serialize;

use super::{ColumnL, OperatorTuple};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Subspace};

/// Points with `||z|| ||L||` above `1 - DOMAIN_MARGIN` are treated as outside
/// the domain of the analytic model.
pub const DOMAIN_MARGIN: f64 = 1e-6;

/// Radius `1 / ||L||` of the ball on which `1 - ZL` is invertible by a
/// Neumann series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainRadius {
    Finite(f64),
    Unbounded,
}

/// The column `L` together with the wandering subspace `W(T)`.
#[derive(Debug, Clone)]
pub struct AnalyticModel {
    pub l: ColumnL,
    pub wandering: Subspace,
}

#[derive(Debug, Clone)]
pub struct ProjectionAtPoint {
    /// `P(z) = (T - Z) L (1 - ZL)^{-1}`.
    pub matrix: CMatrix,
    pub idempotency_residual: f64,
    /// `||(1 - P(z)) - P_W (1 - ZL)^{-1}||_F`.
    pub complement_residual: f64,
}

impl AnalyticModel {
    pub fn new(t: &OperatorTuple, m: usize) -> Result<Self> {
        Ok(AnalyticModel { l: t.column_l(m)?, wandering: t.wandering()? })
    }

    pub fn radius(&self) -> DomainRadius {
        if self.l.norm > 0.0 {
            DomainRadius::Finite(1.0 / self.l.norm)
        } else {
            DomainRadius::Unbounded
        }
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.l.n() {
            return Err(Error::DimensionMismatch { expected: self.l.n(), got: z.len() });
        }
        let znorm = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        let product = znorm * self.l.norm;
        if !product.is_finite() || product >= 1.0 - DOMAIN_MARGIN {
            return Err(Error::OutsideDomain { product });
        }
        Ok(())
    }

    /// `(1 - ZL)^{-1}` for `z` inside the domain.
    pub fn resolvent(&self, z: &[Complex64]) -> Result<CMatrix> {
        self.check_point(z)?;
        let a = linalg::identity(self.l.dim()) - self.l.zl(z);
        a.try_inverse().ok_or(Error::SingularOnSubspace { sigma_min: 0.0 })
    }

    pub fn p_of_z(&self, t: &OperatorTuple, z: &[Complex64]) -> Result<ProjectionAtPoint> {
        let res = self.resolvent(z)?;
        let d = t.dim();
        let mut tzl = linalg::zeros(d, d);
        for ((ti, li), &zi) in t.ops().iter().zip(&self.l.components).zip(z) {
            let shifted = ti - linalg::identity(d) * zi;
            tzl += shifted * li;
        }
        let matrix = tzl * &res;
        let idempotency_residual = linalg::frobenius(&(&matrix * &matrix - &matrix));
        let complement = linalg::identity(d) - &matrix;
        let complement_residual = linalg::frobenius(&(complement - self.wandering.project() * &res));
        Ok(ProjectionAtPoint { matrix, idempotency_residual, complement_residual })
    }

    /// `Sigma_T(X) = sum_i T_i X L_i`.
    pub fn sigma_cap(&self, t: &OperatorTuple, x: &CMatrix) -> CMatrix {
        let mut out = linalg::zeros(t.dim(), t.dim());
        for (ti, li) in t.ops().iter().zip(&self.l.components) {
            out += ti * x * li;
        }
        out
    }
}

impl OperatorTuple {
    pub fn analytic_model(&self, m: usize) -> Result<AnalyticModel> {
        AnalyticModel::new(self, m)
    }

    /// `P(z)` for a single point; builds the model on every call.
    pub fn p_of_z(&self, m: usize, z: &[Complex64]) -> Result<ProjectionAtPoint> {
        self.analytic_model(m)?.p_of_z(self, z)
    }
}
