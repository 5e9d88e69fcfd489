//! Multi-indices `alpha in N^n` and the exact combinatorics attached to them.
//!
//! Indices are 0-based throughout the crate: coordinate `i` of a tuple of `n`
//! operators ranges over `0..n`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `|alpha|` for word enumeration.
pub const DEFAULT_WORD_DEGREE_CAP: usize = 10;
/// Default cap on the number of words a single enumeration may produce.
pub const DEFAULT_WORD_BUDGET: usize = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The unit multi-index `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// `self - other`, or [`Error::NegativeComponent`] unless `self >= other`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b).ok_or(Error::NegativeComponent))
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn add_unit(&self, i: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[i] += 1;
        MultiIndex(e)
    }

    /// `alpha - e_i`, if `alpha_i > 0`.
    pub fn sub_unit(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(MultiIndex(e))
    }

    /// Some coordinate `i` with `alpha_i > 0`; the last such, so that
    /// recursions `alpha = (alpha - e_i) + e_i` peel variables from the right.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.0.iter().rposition(|&a| a > 0)
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// All multi-indices in `n` variables of total degree `d`, in graded
/// lexicographic order: `(2,0), (1,1), (0,2)` for `n = 2, d = 2`.
///
/// This is the one basis order used by every matrix representation in the crate.
pub fn enumerate(n: usize, d: usize) -> Vec<MultiIndex> {
    assert!(n >= 1, "at least one variable");
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fill(&mut cur, 0, d, &mut out);
    out
}

fn fill(cur: &mut [usize], pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill(cur, pos + 1, remaining - a, out);
    }
}

/// All multi-indices with `|alpha| <= max_degree`, degree by degree.
pub fn enumerate_up_to(n: usize, max_degree: usize) -> Vec<MultiIndex> {
    (0..=max_degree).flat_map(|d| enumerate(n, d)).collect()
}

pub fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, j| acc * BigUint::from(j))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

fn alpha_factorial(alpha: &MultiIndex) -> BigUint {
    alpha.entries().iter().fold(BigUint::one(), |acc, &a| acc * factorial(a))
}

/// Multinomial coefficient `gamma_alpha = |alpha|! / alpha!`.
pub fn gamma(alpha: &MultiIndex) -> BigUint {
    factorial(alpha.degree()) / alpha_factorial(alpha)
}

/// Bergman weight `rho_m(alpha) = (m + |alpha| - 1)! / (alpha! (m - 1)!)`.
pub fn rho(m: usize, alpha: &MultiIndex) -> BigUint {
    assert!(m >= 1, "kernel exponent must be positive");
    factorial(m + alpha.degree() - 1) / (alpha_factorial(alpha) * factorial(m - 1))
}

pub fn gamma_f64(alpha: &MultiIndex) -> f64 {
    gamma(alpha).to_f64().unwrap_or(f64::INFINITY)
}

pub fn rho_f64(m: usize, alpha: &MultiIndex) -> f64 {
    rho(m, alpha).to_f64().unwrap_or(f64::INFINITY)
}

pub fn binomial_f64(n: usize, k: usize) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// Words `i = (i_1, ..., i_k)` in which coordinate `j` occurs exactly
/// `alpha_j` times, produced lazily in lexicographic order.
#[derive(Debug, Clone)]
pub struct Words {
    next: Option<Vec<usize>>,
}

/// Enumerate the word set of `alpha` with the default degree cap and budget.
pub fn words(alpha: &MultiIndex) -> Result<Words> {
    words_with(alpha, DEFAULT_WORD_DEGREE_CAP, DEFAULT_WORD_BUDGET)
}

pub fn words_with(alpha: &MultiIndex, degree_cap: usize, budget: usize) -> Result<Words> {
    let degree = alpha.degree();
    if degree > degree_cap {
        return Err(Error::DegreeCapExceeded { degree, cap: degree_cap });
    }
    if gamma(alpha) > BigUint::from(budget) {
        return Err(Error::BudgetExceeded { what: "word enumeration", limit: budget });
    }
    let first = alpha
        .entries()
        .iter()
        .enumerate()
        .flat_map(|(j, &a)| std::iter::repeat_n(j, a))
        .collect();
    Ok(Words { next: Some(first) })
}

impl Iterator for Words {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(current)
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
