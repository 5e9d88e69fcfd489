use serde::Serialize;

use super::OperatorTuple;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Subspace};
use crate::multiindex::MultiIndex;

/// Column and range data of the row operator, from one SVD.
#[derive(Debug, Clone)]
pub struct RowDecomposition {
    /// `Im T^* ⊂ C^{nd}`.
    pub coimage: Subspace,
    /// `Im T = sum_i T_i C^d ⊂ C^d`.
    pub range: Subspace,
    pub singular_values: Vec<f64>,
}

impl RowDecomposition {
    pub fn rank(&self) -> usize {
        self.range.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub residual: f64,
    pub rank: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LForm {
    /// `(T^*T)^+ T^*`, the Moore-Penrose left inverse of the row.
    General,
    /// `(Delta_T T_1^*, ..., Delta_T T_n^*)`.
    Commuting,
}

/// The column operator `L = (L_1, ..., L_n)^T : C^d -> C^{nd}`.
#[derive(Debug, Clone)]
pub struct ColumnL {
    pub components: Vec<CMatrix>,
    pub form: LForm,
    /// Operator norm of the column.
    pub norm: f64,
    /// Distance between the general and commuting forms when both exist.
    pub form_agreement: Option<f64>,
    /// Largest commutator `||L_i L_j - L_j L_i||`.
    pub commutator: f64,
}

impl ColumnL {
    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].nrows()
    }

    pub fn stacked(&self) -> CMatrix {
        linalg::block_col(&self.components)
    }

    /// `L^alpha = L_1^{alpha_1} ... L_n^{alpha_n}`.
    pub fn power(&self, alpha: &MultiIndex) -> CMatrix {
        let mut out = linalg::identity(self.dim());
        for (i, &a) in alpha.entries().iter().enumerate() {
            for _ in 0..a {
                out = &out * &self.components[i];
            }
        }
        out
    }

    /// `Z L = sum_i z_i L_i`.
    pub fn zl(&self, z: &[num_complex::Complex64]) -> CMatrix {
        let mut out = linalg::zeros(self.dim(), self.dim());
        for (l, &zi) in self.components.iter().zip(z) {
            out += l * zi;
        }
        out
    }
}

/// `delta_T = (TT^*)^+ = L^* L` with its intertwining residuals.
#[derive(Debug, Clone)]
pub struct DeltaSmall {
    pub matrix: CMatrix,
    /// `max_i ||T_i^* delta_T - Delta_T T_i^*||_F`.
    pub intertwining_residual: f64,
    /// `||(1 - P_{Im T}) delta_T||_F`.
    pub range_residual: f64,
}

impl OperatorTuple {
    pub fn row_decomposition(&self) -> Result<RowDecomposition> {
        self.row_decomposition_with(false)
    }

    fn row_decomposition_with(&self, strict: bool) -> Result<RowDecomposition> {
        let s = linalg::svd(&self.row())?;
        let r = if strict {
            linalg::rank_strict(&s.singular_values, self.tol.rank)?
        } else {
            linalg::rank_from_singular_values(&s.singular_values, self.tol.rank)
        };
        Ok(RowDecomposition {
            coimage: Subspace::from_orthonormal(s.v.columns(0, r).into_owned(), self.tol.rank),
            range: Subspace::from_orthonormal(s.u.columns(0, r).into_owned(), self.tol.rank),
            singular_values: s.singular_values,
        })
    }

    /// Frame `Q` of `Im T^*` and `B = (Q^* T^*T Q)^{-1}`.
    fn coimage_inverse(&self) -> Result<(CMatrix, CMatrix, CMatrix)> {
        let dec = self.row_decomposition_with(true)?;
        let q = dec.coimage.frame().clone();
        let tq = self.row() * &q;
        let ttq = self.row().adjoint() * &tq;
        let b = linalg::compressed_inverse(&ttq, &q, self.tol.rank)?;
        Ok((q, tq, b))
    }

    /// Checks `(T^*T)^{-1} = (⊕ Delta_T)` on `Im T^*`.
    pub fn satisfies_identity(&self, m: usize) -> Result<IdentityCheck> {
        self.satisfies_identity_on(m, None)
    }

    /// As [`satisfies_identity`](Self::satisfies_identity), with the residual
    /// compressed to `G^n` when a guard subspace `G ⊂ C^d` is given.
    pub fn satisfies_identity_on(&self, m: usize, guard: Option<&Subspace>) -> Result<IdentityCheck> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be positive".into()));
        }
        let (q, _, b) = self.coimage_inverse()?;
        let delta = self.delta_cap(m);
        let big_delta = linalg::block_diag(&vec![delta; self.n()]);
        let x = &q * &b - big_delta * &q;
        let residual = match guard {
            None => linalg::frobenius(&x),
            Some(g) => {
                if g.ambient_dim() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, got: g.ambient_dim() });
                }
                let e = linalg::block_diag(&vec![g.frame().clone(); self.n()]);
                linalg::frobenius(&(e.adjoint() * x * (q.adjoint() * &e)))
            }
        };
        Ok(IdentityCheck { holds: residual <= self.tol.identity, residual, rank: q.ncols(), tol: self.tol.identity })
    }

    /// `L = (T^*T)^+ T^*` split into its `n` components.
    pub fn column_l_general(&self) -> Result<ColumnL> {
        let (q, tq, b) = self.coimage_inverse()?;
        let stacked = q * b * tq.adjoint();
        Ok(self.wrap_l(linalg::split_rows(&stacked, self.n()), LForm::General, None))
    }

    /// The column `L`, in commuting form when the operator identity holds for
    /// `m` and in general form otherwise.
    pub fn column_l(&self, m: usize) -> Result<ColumnL> {
        let general = self.column_l_general()?;
        if !self.satisfies_identity(m)?.holds {
            return Ok(general);
        }
        let delta = self.delta_cap(m);
        let comps: Vec<CMatrix> = self.ops.iter().map(|t| &delta * t.adjoint()).collect();
        let agreement = comps
            .iter()
            .zip(&general.components)
            .map(|(a, b)| linalg::frobenius(&(a - b)))
            .fold(0.0, f64::max);
        if agreement.is_nan() || agreement > self.tol.identity {
            return Err(Error::LFormsDisagree { residual: agreement });
        }
        let l = self.wrap_l(comps, LForm::Commuting, Some(agreement));
        if l.commutator.is_nan() || l.commutator > self.tol.identity {
            return Err(Error::LTupleNotCommuting { residual: l.commutator });
        }
        Ok(l)
    }

    fn wrap_l(&self, components: Vec<CMatrix>, form: LForm, form_agreement: Option<f64>) -> ColumnL {
        let mut commutator: f64 = 0.0;
        for i in 0..components.len() {
            for j in (i + 1)..components.len() {
                let (a, b) = (&components[i], &components[j]);
                commutator = commutator.max(linalg::frobenius(&(a * b - b * a)));
            }
        }
        let mut lsl = linalg::zeros(self.dim, self.dim);
        for l in &components {
            lsl += l.adjoint() * l;
        }
        let norm = linalg::hermitian_eigen(&lsl)
            .map(|(ev, _)| ev.last().copied().unwrap_or(0.0).max(0.0).sqrt())
            .unwrap_or(f64::NAN);
        ColumnL { components, form, norm, form_agreement, commutator }
    }

    /// `delta_T = L^* L`, computed from the general form of `L`.
    pub fn delta_small(&self, m: usize) -> Result<DeltaSmall> {
        let l = self.column_l_general()?;
        let mut matrix = linalg::zeros(self.dim, self.dim);
        for li in &l.components {
            matrix += li.adjoint() * li;
        }
        let delta = self.delta_cap(m);
        let intertwining_residual = self
            .ops
            .iter()
            .map(|t| linalg::frobenius(&(t.adjoint() * &matrix - &delta * t.adjoint())))
            .fold(0.0, f64::max);
        let range = self.row_decomposition()?.range;
        let range_residual = linalg::frobenius(&(&matrix - range.project() * &matrix));
        Ok(DeltaSmall { matrix, intertwining_residual, range_residual })
    }
}
