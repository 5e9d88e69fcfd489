use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{read_literal, Builder};
use crate::bergman::TruncatedBergman;
use crate::error::Result;
use crate::linalg::{self, c, CMatrix, CVector};
use crate::optuple::{OperatorTuple, Tolerances};

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMatrix {
    // column-major fill order keeps the stream layout independent of nalgebra internals
    let mut a = linalg::zeros(r, cols);
    for j in 0..cols {
        for i in 0..r {
            a[(i, j)] = gaussian(rng);
        }
    }
    a
}

fn diagonal_tuple(points: &[Vec<Complex64>], n: usize) -> Vec<CMatrix> {
    (0..n)
        .map(|i| CMatrix::from_diagonal(&CVector::from_iterator(points.len(), points.iter().map(|p| p[i]))))
        .collect()
}

/// Diagonal tuple with the given joint eigenvalues on the unit sphere.
pub fn spherical_coisometry_from_points(points: &[Vec<Complex64>]) -> Vec<CMatrix> {
    let n = points.first().map(Vec::len).unwrap_or(0);
    diagonal_tuple(points, n)
}

/// `U diag(p_k) U^*` for `d` random points `p_k` on the unit sphere of `C^n`
/// and a random unitary `U`.
pub fn spherical_coisometry_random(d: usize, n: usize, seed: u64) -> Result<Vec<CMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<Complex64>> = (0..d)
        .map(|_| {
            let v: Vec<Complex64> = (0..n).map(|_| gaussian(&mut rng)).collect();
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    let s = linalg::svd(&gaussian_matrix(&mut rng, d, d))?;
    let u = &s.u * s.v.adjoint();
    Ok(diagonal_tuple(&points, n).into_iter().map(|dg| &u * dg * u.adjoint()).collect())
}

/// `scale * S D_i S^{-1}` for a random invertible `S` and random diagonals
/// `D_i`, with the scale chosen so that the row norm equals `contraction_scale`.
pub fn random_commuting(n: usize, d: usize, seed: u64, contraction_scale: f64) -> Result<Vec<CMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = gaussian_matrix(&mut rng, d, d) + linalg::identity(d) * c(2.0 * (d as f64).sqrt(), 0.0);
    let s_inv = s.clone().try_inverse().ok_or(crate::Error::SingularOnSubspace { sigma_min: 0.0 })?;
    let ops: Vec<CMatrix> = (0..n)
        .map(|_| {
            let dg = CVector::from_iterator(d, (0..d).map(|_| gaussian(&mut rng)));
            &s * CMatrix::from_diagonal(&dg) * &s_inv
        })
        .collect();
    let norm = linalg::spectral_norm(&linalg::block_row(&ops))?;
    let factor = if norm > 0.0 { contraction_scale / norm } else { 0.0 };
    Ok(ops.into_iter().map(|a| a * c(factor, 0.0)).collect())
}

pub fn jordan_shift(dim: usize) -> Vec<CMatrix> {
    let mut j = linalg::zeros(dim, dim);
    for k in 0..dim.saturating_sub(1) {
        j[(k + 1, k)] = c(1.0, 0.0);
    }
    vec![j]
}

/// Matrices for a builder; parameters are assumed validated.
pub fn build_matrices(b: &Builder) -> std::result::Result<Vec<CMatrix>, String> {
    let err = |e: crate::Error| e.to_string();
    match b {
        Builder::MatrixLiteral { matrices, files } => {
            let mut out = Vec::new();
            for lit in matrices {
                out.push(lit.to_matrix().map_err(err)?);
            }
            for f in files {
                out.push(read_literal(f)?.to_matrix().map_err(err)?);
            }
            Ok(out)
        }
        Builder::JordanShift { dim } => Ok(jordan_shift(*dim)),
        Builder::SphericalCoisometry { points: Some(pts), .. } => {
            let pts: Vec<Vec<Complex64>> = pts.iter().map(|p| p.iter().map(|[re, im]| c(*re, *im)).collect()).collect();
            Ok(spherical_coisometry_from_points(&pts))
        }
        Builder::SphericalCoisometry { d: Some(d), n: Some(n), seed: Some(seed), .. } => {
            spherical_coisometry_random(*d, *n, *seed).map_err(err)
        }
        Builder::SphericalCoisometry { .. } => Err("incomplete spherical_coisometry parameters".into()),
        Builder::TruncatedBergman { n, m, truncation, fiber_dim } => {
            let space = TruncatedBergman::new(*n, *m, *truncation, *fiber_dim).map_err(err)?;
            Ok(space.mult_tuple().ops().to_vec())
        }
        Builder::DirectSum { parts } => {
            let built: Vec<Vec<CMatrix>> = parts.iter().map(build_matrices).collect::<std::result::Result<_, _>>()?;
            let n = built[0].len();
            Ok((0..n).map(|i| linalg::block_diag(&built.iter().map(|p| p[i].clone()).collect::<Vec<_>>())).collect())
        }
        Builder::RandomCommuting { n, d, seed, contraction_scale } => {
            random_commuting(*n, *d, *seed, *contraction_scale).map_err(err)
        }
    }
}

pub fn build_tuple(b: &Builder, tol: Tolerances) -> std::result::Result<OperatorTuple, String> {
    OperatorTuple::with_tolerances(build_matrices(b)?, tol).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_builders_are_deterministic() {
        let a = random_commuting(2, 4, 9, 0.8).unwrap();
        let b = random_commuting(2, 4, 9, 0.8).unwrap();
        assert_eq!(a, b);
        let a = spherical_coisometry_random(5, 2, 7).unwrap();
        let b = spherical_coisometry_random(5, 2, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_commuting_scale() {
        let ops = random_commuting(1, 3, 1, 0.5).unwrap();
        assert!((linalg::spectral_norm(&linalg::block_row(&ops)).unwrap() - 0.5).abs() < 1e-12);
        let zero = random_commuting(2, 3, 1, 0.0).unwrap();
        assert!(zero.iter().all(|a| a.norm() == 0.0));
        let t = OperatorTuple::new(random_commuting(3, 4, 2, 0.9).unwrap()).unwrap();
        assert_eq!(t.n(), 3);
    }

    #[test]
    fn random_coisometry_is_coisometric() {
        let t = OperatorTuple::new(spherical_coisometry_random(5, 2, 7).unwrap()).unwrap();
        let (p, _) = t.predicates().unwrap();
        assert!(p.spherical_coisometry);
    }
}
