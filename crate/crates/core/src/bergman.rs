//! Truncated model spaces `H_m(B^n, D)`: polynomials of total degree at most
//! `N` with coefficients in `D = C^fiber_dim` and norm
//! `||f||^2 = sum_alpha ||f_alpha||^2 / rho_m(alpha)`.
//!
//! Coordinates are taken in the orthonormal basis `e_alpha ⊗ d_k` with
//! `e_alpha = sqrt(rho_m(alpha)) z^alpha`, ordered by monomial (graded-lex)
//! and then by fiber component.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, Subspace};
use crate::multiindex::{binomial_f64, enumerate_up_to, rho_f64, MultiIndex};
use crate::optuple::OperatorTuple;

/// Default truncation degree for `n <= 3`.
pub const DEFAULT_TRUNCATION: usize = 12;

/// Below this distance from the boundary `<z, w> = 1` the kernel is not evaluated.
pub const KERNEL_SINGULARITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Closed,
    Series,
}

#[derive(Debug, Clone)]
pub struct TruncatedBergman {
    n: usize,
    m: usize,
    truncation: usize,
    fiber_dim: usize,
    monomials: Vec<MultiIndex>,
}

impl TruncatedBergman {
    pub fn new(n: usize, m: usize, truncation: usize, fiber_dim: usize) -> Result<Self> {
        if n == 0 || m == 0 || fiber_dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "truncated space needs n, m, fiber_dim >= 1 (got n={n}, m={m}, fiber_dim={fiber_dim})"
            )));
        }
        let count = binomial_f64(n + truncation, truncation) * fiber_dim as f64;
        if count > 5000.0 {
            return Err(Error::BudgetExceeded { what: "truncated space dimension", limit: 5000 });
        }
        Ok(TruncatedBergman { n, m, truncation, fiber_dim, monomials: enumerate_up_to(n, truncation) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    /// `fiber_dim * C(n + N, N)`.
    pub fn dim(&self) -> usize {
        self.monomials.len() * self.fiber_dim
    }

    pub fn index_of(&self, alpha: &MultiIndex, component: usize) -> Option<usize> {
        if alpha.n() != self.n || alpha.degree() > self.truncation || component >= self.fiber_dim {
            return None;
        }
        // degree blocks are contiguous; search within the block
        let start = if alpha.degree() == 0 { 0 } else { binomial_f64(self.n + alpha.degree() - 1, self.n) as usize };
        let block = &self.monomials[start..];
        let pos = block.iter().position(|b| b == alpha)?;
        Some((start + pos) * self.fiber_dim + component)
    }

    pub fn degree_of(&self, index: usize) -> usize {
        self.monomials[index / self.fiber_dim].degree()
    }

    /// Degree of every basis vector, in basis order.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.degree_of(i)).collect()
    }

    /// Matrices of `f -> z_i f` followed by discarding degree `N + 1`.
    pub fn mult_tuple(&self) -> OperatorTuple {
        let d = self.dim();
        let mut ops = vec![linalg::zeros(d, d); self.n];
        for alpha in &self.monomials {
            if alpha.degree() == self.truncation {
                continue;
            }
            let k = alpha.degree();
            for (i, op) in ops.iter_mut().enumerate() {
                let beta = alpha.add_unit(i);
                let weight = ((alpha.entries()[i] + 1) as f64 / (self.m + k) as f64).sqrt();
                for comp in 0..self.fiber_dim {
                    let from = self.index_of(alpha, comp).expect("monomial in range");
                    let to = self.index_of(&beta, comp).expect("monomial in range");
                    op[(to, from)] = c(weight, 0.0);
                }
            }
        }
        OperatorTuple::new(ops).expect("multiplication operators commute")
    }

    fn diag_by_degree(&self, f: impl Fn(usize) -> f64) -> CMatrix {
        let v: Vec<Complex64> = self.degrees().into_iter().map(|k| c(f(k), 0.0)).collect();
        CMatrix::from_diagonal(&CVector::from_vec(v))
    }

    /// `Delta_{M_z}`: weight `(m + k) / (1 + k)` on degree `k`.
    pub fn delta_diag(&self) -> CMatrix {
        let m = self.m as f64;
        self.diag_by_degree(|k| (m + k as f64) / (1.0 + k as f64))
    }

    /// `delta`: identity on constants, `(m + k - 1) / k` on degree `k >= 1`.
    pub fn delta_small_diag(&self) -> CMatrix {
        let m = self.m as f64;
        self.diag_by_degree(|k| if k == 0 { 1.0 } else { (m + k as f64 - 1.0) / k as f64 })
    }

    /// Span of the basis vectors of degree at most `N - j`.
    pub fn guard_band(&self, j: usize) -> Result<Subspace> {
        if j > self.truncation {
            return Err(Error::InvalidParameter(format!("guard band {j} exceeds truncation {}", self.truncation)));
        }
        let top = self.truncation - j;
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| self.degree_of(i) <= top).collect();
        Ok(Subspace::coordinate(self.dim(), &idx))
    }

    /// The constants `1 ⊗ D`, which form the wandering subspace of `M_z`.
    pub fn constants(&self) -> Subspace {
        Subspace::coordinate(self.dim(), &(0..self.fiber_dim).collect::<Vec<_>>())
    }

    /// Orthonormal coordinates of the polynomial with monomial coefficients
    /// `f_alpha` (stacked in basis order).
    pub fn coords_from_coefficients(&self, coeffs: &CVector) -> Result<CVector> {
        self.rescale(coeffs, |r| 1.0 / r.sqrt())
    }

    pub fn coefficients_from_coords(&self, coords: &CVector) -> Result<CVector> {
        self.rescale(coords, f64::sqrt)
    }

    fn rescale(&self, v: &CVector, f: impl Fn(f64) -> f64) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(CVector::from_fn(self.dim(), |i, _| {
            v[i] * f(rho_f64(self.m, &self.monomials[i / self.fiber_dim]))
        }))
    }

    /// Gram matrix of the monomial basis `z^alpha ⊗ d_k`: `diag(1 / rho_m(alpha))`.
    pub fn monomial_gram(&self) -> CMatrix {
        let v: Vec<Complex64> =
            (0..self.dim()).map(|i| c(1.0 / rho_f64(self.m, &self.monomials[i / self.fiber_dim]), 0.0)).collect();
        CMatrix::from_diagonal(&CVector::from_vec(v))
    }

    /// `sum_alpha ||f_alpha||^2 / rho_m(alpha)` from monomial coefficients.
    pub fn norm_sq(&self, coeffs: &CVector) -> Result<f64> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coeffs.len() });
        }
        Ok(self
            .monomials
            .iter()
            .enumerate()
            .map(|(a, alpha)| {
                let block = coeffs.rows(a * self.fiber_dim, self.fiber_dim).norm_squared();
                block / rho_f64(self.m, alpha)
            })
            .sum())
    }

    /// `K_m(z, w) 1_D`, in closed form or as the truncated power series.
    pub fn kernel_eval(&self, z: &[Complex64], w: &[Complex64], mode: KernelMode) -> Result<CMatrix> {
        let value = kernel_scalar(self.m, self.truncation, z, w, mode)?;
        Ok(linalg::identity(self.fiber_dim) * value)
    }
}

/// `K_m(z, w)` for scalar coefficients. The series mode sums `|alpha| <= N`.
pub fn kernel_scalar(m: usize, truncation: usize, z: &[Complex64], w: &[Complex64], mode: KernelMode) -> Result<Complex64> {
    if z.len() != w.len() {
        return Err(Error::DimensionMismatch { expected: z.len(), got: w.len() });
    }
    let inner: Complex64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    match mode {
        KernelMode::Closed => {
            let base = Complex64::new(1.0, 0.0) - inner;
            if base.norm() < KERNEL_SINGULARITY_TOL {
                return Err(Error::KernelSingularity { distance: base.norm() });
            }
            Ok(base.powi(-(m as i32)))
        }
        KernelMode::Series => {
            let mut sum = Complex64::new(0.0, 0.0);
            for alpha in enumerate_up_to(z.len(), truncation) {
                let mut term = Complex64::new(rho_f64(m, &alpha), 0.0);
                for (i, &a) in alpha.entries().iter().enumerate() {
                    term *= (z[i] * w[i].conj()).powu(a as u32);
                }
                sum += term;
            }
            Ok(sum)
        }
    }
}

/// Bound on the series tail: `sum_{k > N} C(m + k - 1, k) r^k` for `r = ||z|| ||w|| < 1`.
pub fn kernel_tail_bound(m: usize, truncation: usize, r: f64) -> f64 {
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    let mut k = truncation + 1;
    let mut term = binomial_f64(m + k - 1, k) * r.powi(k as i32);
    while term > 0.0 && term > total * f64::EPSILON * 1e-3 {
        total += term;
        // ratio of consecutive terms: (m + k) / (k + 1) * r
        term *= (m + k) as f64 / (k + 1) as f64 * r;
        k += 1;
    }
    total
}
