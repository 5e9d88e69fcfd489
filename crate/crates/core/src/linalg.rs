//! Dense complex linear algebra: matrices, subspaces stored as orthonormal
//! frames, rank decisions, projections and inverses restricted to subspaces.
//!
//! The singular value decomposition is the only primitive used for ranks,
//! frames and pseudo-inversion, so every rank decision goes through the same
//! relative threshold `tol * sigma_max`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Default relative rank threshold.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Singular values within this factor of the rank threshold (either side)
/// make a rank decision ambiguous.
pub const RANK_BAND: f64 = 1e2;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Fails with [`Error::NonFinite`] if any entry is NaN or infinite.
pub fn check_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Matrix literal file format: `{"rows": r, "cols": c, "re": [...], "im": [...]}`
/// with both arrays in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixLiteral {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let len = self.rows * self.cols;
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter("matrix literal must have positive rows and cols".into()));
        }
        if self.re.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: self.re.len() });
        }
        if self.im.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: self.im.len() });
        }
        let a = CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let k = i * self.cols + j;
            c(self.re[k], self.im[k])
        });
        check_finite(&a)?;
        Ok(a)
    }

    pub fn from_matrix(a: &CMatrix) -> Self {
        let (rows, cols) = a.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(a[(i, j)].re);
                im.push(a[(i, j)].im);
            }
        }
        MatrixLiteral { rows, cols, re, im }
    }
}

/// Thin SVD `A = U diag(s) V^*` with singular values sorted in descending order.
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    let (r, cdim) = a.shape();
    if r.min(cdim) == 0 {
        return Ok(Svd { u: zeros(r, 0), singular_values: Vec::new(), v: zeros(cdim, 0) });
    }
    let dec = to_faer(a).thin_svd().map_err(|_| Error::SvdFailed)?;
    let k = r.min(cdim);
    let s = dec.S();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
    let (fu, fv) = (dec.U(), dec.V());
    let u = CMatrix::from_fn(r, k, |i, j| fu[(i, order[j])]);
    let v = CMatrix::from_fn(cdim, k, |i, j| fv[(i, order[j])]);
    let singular_values = order.iter().map(|&i| s[i].re).collect();
    Ok(Svd { u, singular_values, v })
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv = to_faer(a).singular_values().map_err(|_| Error::SvdFailed)?;
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

fn to_faer(a: &CMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Number of singular values `>= tol * sigma_max` (descending input).
pub fn rank_from_singular_values(sv: &[f64], tol: f64) -> usize {
    let Some(&smax) = sv.first() else { return 0 };
    if smax <= f64::MIN_POSITIVE {
        return 0;
    }
    sv.iter().take_while(|&&s| s >= tol * smax).count()
}

/// Like [`rank_from_singular_values`], but refuses to decide when a singular
/// value lies within [`RANK_BAND`] of the threshold.
pub fn rank_strict(sv: &[f64], tol: f64) -> Result<usize> {
    if let Some(s) = ambiguous_singular_value(sv, tol) {
        let threshold = tol * sv[0];
        return Err(Error::RankAmbiguous { sigma: s, threshold });
    }
    Ok(rank_from_singular_values(sv, tol))
}

pub fn ambiguous_singular_value(sv: &[f64], tol: f64) -> Option<f64> {
    let &smax = sv.first()?;
    let threshold = tol * smax;
    sv.iter().copied().find(|&s| s > threshold / RANK_BAND && s < threshold * RANK_BAND)
}

pub fn rank(a: &CMatrix, tol: f64) -> Result<usize> {
    Ok(rank_from_singular_values(&singular_values(a)?, tol))
}

/// Operator 2-norm.
pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Block row `[A_1 A_2 ... A_n]`.
pub fn block_row(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        out.view_mut((0, off), b.shape()).copy_from(b);
        off += b.ncols();
    }
    out
}

/// Block column `[A_1; A_2; ...; A_n]`.
pub fn block_col(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        out.view_mut((off, 0), b.shape()).copy_from(b);
        off += b.nrows();
    }
    out
}

pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut cc) = (0, 0);
    for b in blocks {
        out.view_mut((r, cc), b.shape()).copy_from(b);
        r += b.nrows();
        cc += b.ncols();
    }
    out
}

/// Split the rows of `a` into `n` equal blocks.
pub fn split_rows(a: &CMatrix, n: usize) -> Vec<CMatrix> {
    let h = a.nrows() / n;
    (0..n).map(|i| a.rows(i * h, h).into_owned()).collect()
}

/// Eigendecomposition of the Hermitian part of `a`, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = a.nrows();
    if d == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let h = (a + a.adjoint()) * c(0.5, 0.0);
    let eig = to_faer(&h).self_adjoint_eigen(faer::Side::Lower).map_err(|_| Error::SvdFailed)?;
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| s[i].re.total_cmp(&s[j].re));
    let values = order.iter().map(|&i| s[i].re).collect();
    let vectors = CMatrix::from_fn(d, d, |r, k| u[(r, order[k])]);
    Ok((values, vectors))
}

pub fn min_eigenvalue(a: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?.0.first().copied().unwrap_or(0.0))
}

/// Square root of a positive semidefinite matrix; negative eigenvalues
/// (numerical noise) are clamped to zero.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(a)?;
    let top = values.last().copied().unwrap_or(0.0).abs();
    let floor = top * f64::EPSILON * values.len() as f64;
    let roots = CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| c(if l > floor { l.sqrt() } else { 0.0 }, 0.0)),
    );
    Ok(&vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint())
}

/// Moore-Penrose pseudo-inverse with relative threshold `tol`.
pub fn pinv(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    let s = svd(a)?;
    let r = rank_from_singular_values(&s.singular_values, tol);
    let mut out = zeros(a.ncols(), a.nrows());
    for k in 0..r {
        let inv = 1.0 / s.singular_values[k];
        out += s.v.column(k) * s.u.column(k).adjoint() * c(inv, 0.0);
    }
    Ok(out)
}

/// A subspace of `C^d`, stored as an orthonormal column frame.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    frame: CMatrix,
    tol: f64,
}

impl Subspace {
    pub fn full(d: usize) -> Self {
        Subspace { ambient_dim: d, frame: identity(d), tol: DEFAULT_RANK_TOL }
    }

    pub fn zero(d: usize) -> Self {
        Subspace { ambient_dim: d, frame: zeros(d, 0), tol: DEFAULT_RANK_TOL }
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(d: usize, indices: &[usize]) -> Self {
        let mut frame = zeros(d, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            frame[(i, k)] = c(1.0, 0.0);
        }
        Subspace { ambient_dim: d, frame, tol: DEFAULT_RANK_TOL }
    }

    /// Wrap a frame that is already orthonormal (not checked).
    pub(crate) fn from_orthonormal(frame: CMatrix, tol: f64) -> Self {
        Subspace { ambient_dim: frame.nrows(), frame, tol }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &CMatrix {
        &self.frame
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Orthogonal projection `frame * frame^*`.
    pub fn project(&self) -> CMatrix {
        &self.frame * self.frame.adjoint()
    }

    /// `self + other` (closed span of the union).
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same_ambient(other)?;
        orthonormal_frame(&block_row(&[self.frame.clone(), other.frame.clone()]), self.tol)
    }

    pub fn ortho_complement(&self) -> Result<Subspace> {
        let d = self.ambient_dim;
        if self.dim() == 0 {
            return Ok(Subspace::full(d).with_tol(self.tol));
        }
        if self.dim() == d {
            return Ok(Subspace::zero(d).with_tol(self.tol));
        }
        // I - P has singular values exactly 0 or 1.
        let comp = identity(d) - self.project();
        let s = svd(&comp)?;
        let r = s.singular_values.iter().take_while(|&&x| x > 0.5).count();
        Ok(Subspace { ambient_dim: d, frame: s.u.columns(0, r).into_owned(), tol: self.tol })
    }

    /// `self ∩ other`, as the kernel of the stacked complementary projections.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same_ambient(other)?;
        let d = self.ambient_dim;
        let stacked = block_col(&[identity(d) - self.project(), identity(d) - other.project()]);
        let kernel = kernel(&stacked, self.tol)?;
        Ok(kernel.with_tol(self.tol))
    }

    /// Sines of the principal angles between two subspaces of equal dimension,
    /// descending. `None` if the dimensions differ.
    pub fn principal_angle_sines(&self, other: &Subspace) -> Result<Option<Vec<f64>>> {
        self.check_same_ambient(other)?;
        if self.dim() != other.dim() {
            return Ok(None);
        }
        let residual = &other.frame - self.project() * &other.frame;
        Ok(Some(singular_values(&residual)?))
    }

    /// `||(1 - P) A P||`, the failure of `A` to map the subspace into itself.
    pub fn invariance_residual(&self, a: &CMatrix) -> Result<f64> {
        let aq = a * &self.frame;
        let leak = &aq - &self.frame * (self.frame.adjoint() * &aq);
        spectral_norm(&leak)
    }

    /// Distance of `x` from the subspace.
    pub fn distance(&self, x: &CVector) -> f64 {
        (x - &self.frame * (self.frame.adjoint() * x)).norm()
    }

    fn check_same_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: other.ambient_dim });
        }
        Ok(())
    }
}

/// Orthonormal frame for the numerical column span of `generators`.
pub fn orthonormal_frame(generators: &CMatrix, tol: f64) -> Result<Subspace> {
    orthonormal_frame_scaled(generators, tol, 0.0)
}

/// As [`orthonormal_frame`], but singular values below `tol * scale` are
/// dropped even when they dominate the spectrum.
pub fn orthonormal_frame_scaled(generators: &CMatrix, tol: f64, scale: f64) -> Result<Subspace> {
    let d = generators.nrows();
    let s = svd(generators)?;
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let threshold = tol * smax.max(scale);
    let r = if smax <= f64::MIN_POSITIVE { 0 } else { s.singular_values.iter().take_while(|&&x| x >= threshold).count() };
    Ok(Subspace { ambient_dim: d, frame: s.u.columns(0, r).into_owned(), tol })
}

/// Numerical kernel of `a` (as a subspace of its domain).
pub fn kernel(a: &CMatrix, tol: f64) -> Result<Subspace> {
    let row_space = orthonormal_frame(&a.adjoint(), tol)?;
    row_space.ortho_complement()
}

/// Inverse of `A|S : S -> S`, extended by zero on `S^⊥`.
pub fn restricted_inverse(a: &CMatrix, s: &Subspace) -> Result<CMatrix> {
    if a.nrows() != s.ambient_dim() || a.ncols() != s.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: s.ambient_dim(), got: a.nrows() });
    }
    let aq = a * s.frame();
    inverse_on_frame(&aq, s.frame(), s.tol())
}

/// Given `aq = A Q` for an orthonormal frame `Q`, returns `Q (Q^* A Q)^{-1} Q^*`
/// after checking that `A` leaves `span Q` invariant and is invertible there.
pub(crate) fn inverse_on_frame(aq: &CMatrix, q: &CMatrix, tol: f64) -> Result<CMatrix> {
    let inv = compressed_inverse(aq, q, tol)?;
    Ok(q * inv * q.adjoint())
}

/// Given `aq = A Q` for an orthonormal frame `Q` of an `A`-invariant
/// subspace, returns `(Q^* A Q)^{-1}`.
pub(crate) fn compressed_inverse(aq: &CMatrix, q: &CMatrix, tol: f64) -> Result<CMatrix> {
    if q.ncols() == 0 {
        return Ok(zeros(0, 0));
    }
    let compressed = q.adjoint() * aq;
    let leak = aq - q * &compressed;
    let scale = spectral_norm(aq)?.max(1.0);
    let residual = spectral_norm(&leak)?;
    if residual > tol.max(1e-12) * scale * 1e2 {
        return Err(Error::NotInvariant { residual });
    }
    let s = svd(&compressed)?;
    let sigma_min = s.singular_values.last().copied().unwrap_or(0.0);
    let sigma_max = s.singular_values[0];
    if sigma_min < tol * sigma_max.max(1.0) {
        return Err(Error::SingularOnSubspace { sigma_min });
    }
    let mut v = s.v.clone();
    for (k, sv) in s.singular_values.iter().enumerate() {
        v.column_mut(k).scale_mut(1.0 / sv);
    }
    Ok(v * s.u.adjoint())
}
