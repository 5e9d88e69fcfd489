use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::multiindex::{binomial_f64, enumerate_up_to, rho_f64, MultiIndex};
use crate::optuple::OperatorTuple;

/// Series terms below this size stop the norm evaluation.
const SERIES_TOL: f64 = 1e-16;
const SERIES_BUDGET: usize = 400;
const HYPERCONTRACTION_TOL: f64 = 1e-9;

/// The dilation map `jx = sum_alpha rho_m(alpha) (Delta^{(m)})^{1/2} T^{*alpha} x z^alpha`.
#[derive(Debug, Clone, Serialize)]
pub struct Dilation {
    #[serde(skip)]
    pub coefficients: Vec<(MultiIndex, CMatrix)>,
    /// `sum_{k <= K} C(m + k - 1, k) sigma^k(Delta^{(m)})`, the Gram operator of `j`
    /// with the series cut where its terms fall below `1e-16`.
    #[serde(skip)]
    pub gram: CMatrix,
    #[serde(skip)]
    pub s_infinity: CMatrix,
    pub s_infinity_converged: bool,
    pub series_degree: usize,
    /// Norm of the first omitted series term.
    pub tail_estimate: f64,
    /// `max | ||jx||^2 + <S_inf x, x> - ||x||^2 | / ||x||^2` over the sample vectors.
    pub pythagoras_residual: f64,
}

impl Dilation {
    /// `||jx||^2` from the coefficient list, `sum_alpha ||c_alpha x||^2 / rho_m(alpha)`.
    pub fn norm_sq_truncated(&self, m: usize, x: &CVector) -> f64 {
        self.coefficients.iter().map(|(a, cf)| (cf * x).norm_squared() / rho_f64(m, a)).sum()
    }

    /// `||jx||^2` from the full series.
    pub fn norm_sq(&self, x: &CVector) -> f64 {
        (x.adjoint() * &self.gram * x)[(0, 0)].re
    }

    pub fn pythagoras_gap(&self, x: &CVector) -> f64 {
        let s = (x.adjoint() * &self.s_infinity * x)[(0, 0)].re;
        (self.norm_sq(x) + s - x.norm_squared()).abs() / x.norm_squared().max(f64::MIN_POSITIVE)
    }
}

/// Builds `j` after checking that `T` is an `m`-hypercontraction and evaluates
/// the Pythagoras identity on `samples`.
pub fn dilation_j(t: &OperatorTuple, m: usize, max_degree: usize, samples: &[CVector]) -> Result<Dilation> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    for order in [1, m] {
        let ev = linalg::min_eigenvalue(&t.defect(order))?;
        if ev < -HYPERCONTRACTION_TOL {
            return Err(Error::NotHypercontraction { order, eigenvalue: ev });
        }
    }
    let defect = clean_defect(&t.defect(m), m)?;
    let root = linalg::psd_sqrt(&defect)?;
    let coefficients = enumerate_up_to(t.n(), max_degree)
        .into_iter()
        .map(|a| {
            let cf = &root * t.adjoint_power(&a) * c(rho_f64(m, &a), 0.0);
            (a, cf)
        })
        .collect();

    let mut gram = linalg::zeros(t.dim(), t.dim());
    let mut term = defect;
    let mut k = 0;
    let tail_estimate = loop {
        let weight = if k == 0 { 1.0 } else { binomial_f64(m + k - 1, k) };
        let scaled = &term * c(weight, 0.0);
        let size = linalg::frobenius(&scaled);
        if size < SERIES_TOL || k >= SERIES_BUDGET {
            break size;
        }
        gram += scaled;
        term = t.sigma(&term);
        k += 1;
    };

    let c0 = t.c_dot_0();
    let (s_infinity, s_infinity_converged) = match c0.limit {
        Some(limit) => (limit, true),
        None => {
            let powers = t.sigma_powers_of_identity(crate::optuple::C_DOT_0_BUDGET);
            (powers.last().cloned().expect("non-empty"), false)
        }
    };
    let mut dil = Dilation {
        coefficients,
        gram,
        s_infinity,
        s_infinity_converged,
        series_degree: k,
        tail_estimate,
        pythagoras_residual: 0.0,
    };
    dil.pythagoras_residual = samples.iter().map(|x| dil.pythagoras_gap(x)).fold(0.0, f64::max);
    Ok(dil)
}

/// Drops eigenvalues of `Delta^{(m)}` at the rounding level of the binomial sum
/// that produced it, `2^m eps d`, so that a numerically zero defect is exactly zero.
fn clean_defect(defect: &CMatrix, m: usize) -> Result<CMatrix> {
    let d = defect.nrows();
    let floor = 2f64.powi(m as i32) * f64::EPSILON * d.max(1) as f64;
    let (values, vectors) = linalg::hermitian_eigen(defect)?;
    let kept = CVector::from_iterator(d, values.iter().map(|&l| c(if l > floor { l } else { 0.0 }, 0.0)));
    Ok(&vectors * CMatrix::from_diagonal(&kept) * vectors.adjoint())
}
