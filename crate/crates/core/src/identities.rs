//! Exact verification of the scalar and combinatorial identities behind the
//! numeric pipeline, in arbitrary-precision rationals.
//!
//! Every verifier is a thin wrapper around a `*_with` form whose coefficients
//! can be replaced, so that the mutation probes exercise the same code path.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::exec::Exec;
use crate::multiindex::{binomial, enumerate, enumerate_up_to, gamma, rho, MultiIndex};

pub type Rational = BigRational;

fn int(x: BigUint) -> BigInt {
    BigInt::from(x)
}

fn rat(x: BigUint) -> Rational {
    Rational::from_integer(int(x))
}

fn signed(j: usize, x: BigUint) -> Rational {
    let r = rat(x);
    if j.is_multiple_of(2) {
        r
    } else {
        -r
    }
}

/// Coefficients `C(m + k - 1, k)`, `k = 0..=order`, of `(1 - t)^{-m}`.
pub fn kernel_series(m: usize, order: usize) -> Vec<Rational> {
    (0..=order).map(|k| rat(binomial(m + k - 1, k))).collect()
}

/// Coefficients `(-1)^j C(m, j)`, `j = 0..=m`, of `(1 - t)^m`.
pub fn kernel_reciprocal(m: usize) -> Vec<Rational> {
    (0..=m).map(|j| signed(j, binomial(m, j))).collect()
}

/// Product of two power series truncated after `t^order`.
pub fn truncated_product(a: &[Rational], b: &[Rational], order: usize) -> Vec<Rational> {
    (0..=order)
        .map(|k| {
            (0..=k)
                .filter(|&i| i < a.len() && k - i < b.len())
                .fold(Rational::zero(), |acc, i| acc + &a[i] * &b[k - i])
        })
        .collect()
}

pub fn verify_reciprocal_with(a: &[Rational], b: &[Rational], order: usize) -> bool {
    let p = truncated_product(a, b, order);
    p[0].is_one() && p[1..].iter().all(Zero::is_zero)
}

/// `(sum_{k <= K} C(m+k-1, k) t^k) (sum_{j <= m} (-1)^j C(m, j) t^j) = 1 + O(t^{K+1})`.
pub fn verify_reciprocal(m: usize, order: usize) -> bool {
    verify_reciprocal_with(&kernel_series(m, order), &kernel_reciprocal(m), order)
}

/// Left side of the weighted binomial identity with outer coefficients `outer(j)`:
/// `sum_{j<m} outer(j) sum_{|beta|=j, beta<=alpha} gamma_beta gamma_{alpha-beta} / gamma_alpha C(m+|alpha-beta|-1, |alpha-beta|)`.
pub fn weighted_sum_with(m: usize, alpha: &MultiIndex, outer: impl Fn(usize) -> Rational) -> Rational {
    let g_alpha = rat(gamma(alpha));
    let mut total = Rational::zero();
    for j in 0..m.min(alpha.degree() + 1) {
        let mut inner = Rational::zero();
        for beta in enumerate(alpha.n(), j) {
            let Ok(rest) = alpha.checked_sub(&beta) else { continue };
            let k = rest.degree();
            inner += rat(gamma(&beta) * gamma(&rest)) * rat(binomial(m + k - 1, k)) / &g_alpha;
        }
        total += outer(j) * inner;
    }
    total
}

/// `(-1)^j C(m, j + 1)`.
pub fn alternating_outer(m: usize) -> impl Fn(usize) -> Rational {
    move |j| signed(j, binomial(m, j + 1))
}

/// The weighted binomial identity equals `C(m + |alpha|, |alpha| + 1)`.
pub fn verify_weighted_binomial(m: usize, n: usize, alpha: &MultiIndex) -> bool {
    if m == 0 || alpha.n() != n {
        return false;
    }
    let rhs = rat(binomial(m + alpha.degree(), alpha.degree() + 1));
    weighted_sum_with(m, alpha, alternating_outer(m)) == rhs
}

pub fn telescope_sum_with(m: usize, coeff: impl Fn(usize) -> Rational) -> Rational {
    (0..m).fold(Rational::zero(), |acc, j| acc + coeff(j))
}

/// `sum_{j<m} (-1)^j C(m, j+1) = 1`.
pub fn verify_telescope(m: usize) -> bool {
    m >= 1 && telescope_sum_with(m, alternating_outer(m)).is_one()
}

pub fn rho_factorization_holds(rho_value: &BigUint, m: usize, alpha: &MultiIndex) -> bool {
    let k = alpha.degree();
    *rho_value == binomial(m + k - 1, k) * gamma(alpha)
}

/// `rho_m(alpha) = C(m + |alpha| - 1, |alpha|) gamma_alpha`.
pub fn verify_rho_factorization(m: usize, alpha: &MultiIndex) -> bool {
    m >= 1 && rho_factorization_holds(&rho(m, alpha), m, alpha)
}

/// Grid sizes for the identity sweeps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepParams {
    pub weighted_max_m: usize,
    pub weighted_max_n: usize,
    pub weighted_max_deg: usize,
    pub reciprocal_max_m: usize,
    pub reciprocal_order: usize,
    pub telescope_max_m: usize,
    pub rho_max_m: usize,
    pub rho_max_n: usize,
    pub rho_max_deg: usize,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            weighted_max_m: 5,
            weighted_max_n: 3,
            weighted_max_deg: 6,
            reciprocal_max_m: 6,
            reciprocal_order: 20,
            telescope_max_m: 64,
            rho_max_m: 6,
            rho_max_n: 4,
            rho_max_deg: 10,
        }
    }
}

impl SweepParams {
    /// One grid `m <= max_m, n <= max_n, |alpha| <= max_deg` for the
    /// multi-index sweeps; the scalar sweeps keep their defaults unless the
    /// requested `m` is larger.
    pub fn uniform(max_m: usize, max_n: usize, max_deg: usize) -> Self {
        let d = SweepParams::default();
        SweepParams {
            weighted_max_m: max_m,
            weighted_max_n: max_n,
            weighted_max_deg: max_deg,
            reciprocal_max_m: max_m.max(d.reciprocal_max_m),
            telescope_max_m: max_m.max(d.telescope_max_m),
            rho_max_m: max_m,
            rho_max_n: max_n,
            rho_max_deg: max_deg,
            ..d
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub passed: bool,
}

fn sweep<T: Sync>(name: &'static str, cases: Vec<T>, exec: Exec, check: impl Fn(&T) -> Option<String> + Sync) -> SweepReport {
    let failures: Vec<String> = exec.map(&cases, |c| check(c)).into_iter().flatten().collect();
    SweepReport { name, cases: cases.len(), passed: failures.is_empty(), failures }
}

fn grid(max_m: usize, max_n: usize, max_deg: usize) -> Vec<(usize, MultiIndex)> {
    let mut cases = Vec::new();
    for m in 1..=max_m {
        for n in 1..=max_n {
            for alpha in enumerate_up_to(n, max_deg) {
                cases.push((m, alpha));
            }
        }
    }
    cases
}

pub fn run_sweeps(p: &SweepParams, exec: Exec) -> Vec<SweepReport> {
    vec![
        sweep("weighted_binomial", grid(p.weighted_max_m, p.weighted_max_n, p.weighted_max_deg), exec, |(m, a)| {
            (!verify_weighted_binomial(*m, a.n(), a)).then(|| format!("m={m} alpha={a}"))
        }),
        sweep("kernel_reciprocal", (1..=p.reciprocal_max_m).collect(), exec, |&m| {
            (!verify_reciprocal(m, p.reciprocal_order)).then(|| format!("m={m} K={}", p.reciprocal_order))
        }),
        sweep("telescope", (1..=p.telescope_max_m).collect(), exec, |&m| {
            (!verify_telescope(m)).then(|| format!("m={m}"))
        }),
        sweep("rho_factorization", grid(p.rho_max_m, p.rho_max_n, p.rho_max_deg), exec, |(m, a)| {
            (!verify_rho_factorization(*m, a)).then(|| format!("m={m} alpha={a}"))
        }),
    ]
}

/// Each verifier run on deliberately corrupted input; every entry must be `false`.
pub fn mutation_probes() -> Vec<(&'static str, bool)> {
    let one = Rational::one();
    let mut series = kernel_series(3, 20);
    series[4] += &one;
    let reciprocal = verify_reciprocal_with(&series, &kernel_reciprocal(3), 20);

    let alpha = MultiIndex::new(vec![2, 1, 1]);
    let outer = alternating_outer(3);
    let perturbed = weighted_sum_with(3, &alpha, |j| if j == 1 { outer(j) + Rational::one() } else { outer(j) });
    let weighted = perturbed == rat(binomial(3 + alpha.degree(), alpha.degree() + 1));

    let outer = alternating_outer(5);
    let telescope = telescope_sum_with(5, |j| if j == 2 { outer(j) * rat(BigUint::from(2u32)) } else { outer(j) }).is_one();

    let beta = MultiIndex::new(vec![3, 2]);
    let rho_factor = rho_factorization_holds(&(rho(4, &beta) + BigUint::one()), 4, &beta);

    vec![
        ("weighted_binomial", weighted),
        ("kernel_reciprocal", reciprocal),
        ("telescope", telescope),
        ("rho_factorization", rho_factor),
    ]
}
