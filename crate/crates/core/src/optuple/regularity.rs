use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::OperatorTuple;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{self, CMatrix};
use crate::multiindex::binomial_f64;

/// Largest block side `C(n, p) * d` for which the Koszul complex is built.
pub const KOSZUL_BUDGET: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    RegularCertified,
    RegularLikely,
    NotRegular,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CodimSample {
    /// Fraction of the domain radius, `0` for the origin.
    pub radius_fraction: f64,
    pub z_norm: f64,
    pub z_re: Vec<f64>,
    pub z_im: Vec<f64>,
    /// `dim C^d / sum_i (T_i - z_i) C^d`.
    pub codim: usize,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub surjective: bool,
    /// `H^{n-1}` of the Koszul complex at the origin vanishes; `None` if over budget.
    pub koszul_top_ok: Option<bool>,
    pub koszul_dims: Option<Vec<usize>>,
    /// `None` when `L = 0`, in which case samples use radius one.
    pub radius: Option<f64>,
    pub codim_profile: Vec<CodimSample>,
    pub verdict: RegularityVerdict,
}

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub fractions: Vec<f64>,
    pub samples_per_fraction: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { fractions: vec![0.1, 0.3, 0.5], samples_per_fraction: 2, seed: 0x5eed, exec: Exec::default() }
    }
}

/// Exterior basis of `Λ^p(C^n)` as sorted bitmasks.
fn exterior_basis(n: usize, p: usize) -> Vec<u32> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == p).collect()
}

impl OperatorTuple {
    /// Matrix of `δ^p : Λ^p ⊗ C^d -> Λ^{p+1} ⊗ C^d`,
    /// `δ(e_I ⊗ x) = sum_{i ∉ I} (-1)^{#{j in I : j < i}} e_{I ∪ i} ⊗ (λ_i - T_i) x`.
    pub fn koszul_differential(&self, lambda: &[Complex64], p: usize) -> Result<CMatrix> {
        let n = self.n();
        if lambda.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: lambda.len() });
        }
        let d = self.dim;
        let src = exterior_basis(n, p);
        let dst = exterior_basis(n, p + 1);
        let side = src.len().max(dst.len()) * d;
        if side > KOSZUL_BUDGET {
            return Err(Error::BudgetExceeded { what: "Koszul complex", limit: KOSZUL_BUDGET });
        }
        let shifted: Vec<CMatrix> =
            (0..n).map(|i| linalg::identity(d) * lambda[i] - &self.ops[i]).collect();
        let mut out = linalg::zeros(dst.len() * d, src.len() * d);
        for (col, &set) in src.iter().enumerate() {
            for (i, op) in shifted.iter().enumerate() {
                if set & (1 << i) != 0 {
                    continue;
                }
                let below = (set & ((1u32 << i) - 1)).count_ones();
                let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
                let row = dst.binary_search(&(set | (1 << i))).expect("basis element");
                let mut block = out.view_mut((row * d, col * d), (d, d));
                block += op * linalg::c(sign, 0.0);
            }
        }
        Ok(out)
    }

    /// `dim H^p` of the Koszul complex of `λ - T`, for `p = 0..=n`.
    pub fn koszul_cohomology(&self, lambda: &[Complex64]) -> Result<Vec<usize>> {
        let n = self.n();
        let d = self.dim;
        let mut ranks = Vec::with_capacity(n);
        for p in 0..n {
            ranks.push(linalg::rank(&self.koszul_differential(lambda, p)?, self.tol.rank)?);
        }
        Ok((0..=n)
            .map(|p| {
                let space = binomial_f64(n, p) as usize * d;
                let out_rank = if p < n { ranks[p] } else { 0 };
                let in_rank = if p > 0 { ranks[p - 1] } else { 0 };
                space - out_rank - in_rank
            })
            .collect())
    }

    /// Codimension of `sum_i (T_i - z_i) C^d`, flagged when the rank decision
    /// falls inside the ambiguity band.
    fn codim_at(&self, z: &[Complex64]) -> Result<(usize, bool)> {
        let d = self.dim;
        let shifted: Vec<CMatrix> =
            self.ops.iter().zip(z).map(|(t, &zi)| t - linalg::identity(d) * zi).collect();
        let sv = linalg::singular_values(&linalg::block_row(&shifted))?;
        let rank = linalg::rank_from_singular_values(&sv, self.tol.rank);
        let ambiguous = linalg::ambiguous_singular_value(&sv, self.tol.rank).is_some();
        Ok((d - rank, ambiguous))
    }

    pub fn regularity_probe(&self, cfg: &ProbeConfig) -> Result<RegularityReport> {
        let n = self.n();
        let origin = vec![Complex64::new(0.0, 0.0); n];
        let (codim0, amb0) = self.codim_at(&origin)?;
        let surjective = codim0 == 0 && !amb0;
        let koszul_dims = match self.koszul_cohomology(&origin) {
            Ok(dims) => Some(dims),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        let koszul_top_ok = koszul_dims.as_ref().map(|dims| dims[n - 1] == 0);

        let radius = match self.column_l_general() {
            Ok(l) if l.norm > 0.0 => Some(1.0 / l.norm),
            Ok(_) => None,
            Err(Error::RankAmbiguous { .. }) => None,
            Err(e) => return Err(e),
        };
        let base = radius.unwrap_or(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut points = Vec::new();
        for &frac in &cfg.fractions {
            for _ in 0..cfg.samples_per_fraction {
                let raw: Vec<Complex64> = (0..n)
                    .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                    .collect();
                let norm = raw.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
                let z: Vec<Complex64> = raw.iter().map(|w| w * (frac * base / norm)).collect();
                points.push((frac, z));
            }
        }
        let sampled = cfg.exec.map(&points, |(frac, z)| {
            self.codim_at(z).map(|(codim, ambiguous)| CodimSample {
                radius_fraction: *frac,
                z_norm: frac * base,
                z_re: z.iter().map(|w| w.re).collect(),
                z_im: z.iter().map(|w| w.im).collect(),
                codim,
                ambiguous,
            })
        });
        let mut codim_profile = vec![CodimSample {
            radius_fraction: 0.0,
            z_norm: 0.0,
            z_re: vec![0.0; n],
            z_im: vec![0.0; n],
            codim: codim0,
            ambiguous: amb0,
        }];
        for s in sampled {
            codim_profile.push(s?);
        }

        let verdict = if surjective || koszul_top_ok == Some(true) {
            RegularityVerdict::RegularCertified
        } else {
            let clear: Vec<usize> = codim_profile.iter().filter(|s| !s.ambiguous).map(|s| s.codim).collect();
            if clear.windows(2).any(|w| w[0] != w[1]) || clear.iter().any(|&c| c != clear[0]) {
                RegularityVerdict::NotRegular
            } else if codim_profile.iter().any(|s| s.ambiguous) {
                RegularityVerdict::Inconclusive
            } else {
                RegularityVerdict::RegularLikely
            }
        };
        Ok(RegularityReport { surjective, koszul_top_ok, koszul_dims, radius, codim_profile, verdict })
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::linalg::c;
    use crate::linalg::testing::*;
    use proptest::prelude::*;

    #[test]
    fn jordan_is_not_regular() {
        let j = jordan(3);
        let r = j.regularity_probe(&ProbeConfig::default()).unwrap();
        assert!(!r.surjective);
        assert_eq!(r.codim_profile[0].codim, 1);
        assert!(r.codim_profile[1..].iter().all(|s| s.codim == 0));
        assert_eq!(r.verdict, RegularityVerdict::NotRegular);
        assert_eq!(r.koszul_dims, Some(vec![1, 1]));
    }

    #[test]
    fn coisometry_is_certified() {
        let mut rg = rng(51);
        let t = spherical_coisometry(&mut rg, 4, 2);
        let r = t.regularity_probe(&ProbeConfig::default()).unwrap();
        assert!(r.surjective);
        assert_eq!(r.verdict, RegularityVerdict::RegularCertified);
    }

    #[test]
    fn zero_tuple_has_constant_profile() {
        // 0 on C^2 with n = 2: codim 2 at 0 but 0 at any z != 0
        let z = OperatorTuple::zero(2, 2);
        let r = z.regularity_probe(&ProbeConfig::default()).unwrap();
        assert_eq!(r.radius, None);
        assert_eq!(r.verdict, RegularityVerdict::NotRegular);
    }

    #[test]
    fn koszul_euler_characteristic_vanishes() {
        let mut rg = rng(52);
        let t = random_commuting(&mut rg, 3, 3, 0.9);
        let dims = t.koszul_cohomology(&[c(0.1, 0.0), c(0.0, 0.2), c(0.3, 0.1)]).unwrap();
        let chi: i64 = dims.iter().enumerate().map(|(p, &h)| if p % 2 == 0 { h as i64 } else { -(h as i64) }).sum();
        assert_eq!(chi, 0);
    }

    #[test]
    fn koszul_budget() {
        let t = OperatorTuple::zero(3, 500);
        assert!(matches!(t.koszul_cohomology(&[c(0.0, 0.0); 3]), Err(Error::BudgetExceeded { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn koszul_squares_to_zero(seed in any::<u64>(), n in 2usize..4, d in 1usize..4) {
            let mut rg = rng(seed);
            let t = random_commuting(&mut rg, n, d, 0.9);
            let lambda: Vec<_> = random_vector(&mut rg, n).iter().copied().collect();
            for p in 0..n - 1 {
                let a = t.koszul_differential(&lambda, p).unwrap();
                let b = t.koszul_differential(&lambda, p + 1).unwrap();
                prop_assert!((b * a).norm() < 1e-10);
            }
        }
    }
}
