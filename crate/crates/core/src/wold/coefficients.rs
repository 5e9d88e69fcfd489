use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gram_residual;
use crate::error::{Error, Result};
use crate::exec::{max_residual, Exec};
use crate::linalg::{self, c, CMatrix, Subspace};
use crate::multiindex::{binomial_f64, enumerate_up_to, gamma_f64, words, MultiIndex};
use crate::optuple::{AnalyticModel, ColumnL, LForm, OperatorTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// `c_alpha = P_W sum_{i in I(alpha)} L_{i_1} ... L_{i_k}` with the general `L`.
    General,
    /// `c_alpha = gamma_alpha P_W L^alpha` with `L_i = Delta_T T_i^*`.
    Commuting,
}

/// Taylor coefficients `c_alpha : H -> W(T)` of `(Vx)(z) = sum c_alpha x z^alpha`,
/// written in an orthonormal basis of `W(T)`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub mode: CoefficientMode,
    pub wandering: Subspace,
    pub entries: Vec<(MultiIndex, CMatrix)>,
}

impl Coefficients {
    pub fn get(&self, alpha: &MultiIndex) -> Option<&CMatrix> {
        self.entries.iter().find(|(a, _)| a == alpha).map(|(_, c)| c)
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|(a, _)| a.degree()).max().unwrap_or(0)
    }
}

fn commuting_l(t: &OperatorTuple, m: usize) -> Result<ColumnL> {
    let l = t.column_l(m)?;
    if l.form != LForm::Commuting {
        return Err(Error::InvalidParameter("commuting form of L requires the operator identity".into()));
    }
    Ok(l)
}

pub fn v_coefficients(t: &OperatorTuple, m: usize, max_degree: usize, mode: CoefficientMode) -> Result<Coefficients> {
    let wandering = t.wandering()?;
    let qs = wandering.frame().adjoint();
    let alphas = enumerate_up_to(t.n(), max_degree);
    let mut entries = Vec::with_capacity(alphas.len());
    match mode {
        CoefficientMode::General => {
            let l = t.column_l_general()?;
            for alpha in alphas {
                let mut sum = linalg::zeros(qs.nrows(), t.dim());
                for word in words(&alpha)? {
                    sum += word.iter().fold(qs.clone(), |acc, &i| acc * &l.components[i]);
                }
                entries.push((alpha, sum));
            }
        }
        CoefficientMode::Commuting => {
            let l = commuting_l(t, m)?;
            for alpha in alphas {
                let coeff = &qs * l.power(&alpha) * c(gamma_f64(&alpha), 0.0);
                entries.push((alpha, coeff));
            }
        }
    }
    Ok(Coefficients { mode, wandering, entries })
}

/// `max_{alpha, i} ||c_alpha T_i - c_{alpha - e_i}||`, reading `c_{alpha - e_i}` as
/// zero when `alpha_i = 0`: the coefficient form of `V T_i = M_{z_i} V`.
pub fn intertwining_residual(t: &OperatorTuple, coeffs: &Coefficients) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (alpha, ca) in &coeffs.entries {
        for i in 0..t.n() {
            let lhs = ca * t.op(i);
            let diff = match alpha.sub_unit(i) {
                Some(prev) => {
                    let rhs = coeffs.get(&prev).ok_or(Error::InvalidParameter("missing coefficient".into()))?;
                    lhs - rhs
                }
                None => lhs,
            };
            worst = worst.max(linalg::frobenius(&diff));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct GramCheck {
    pub degree: usize,
    pub gram: f64,
    pub intertwining: f64,
    pub mode: CoefficientMode,
}

/// Gram comparison on `W(T)` up to `max_degree` together with the coefficient
/// intertwining residual.
pub fn u_gram_check(t: &OperatorTuple, m: usize, max_degree: usize, exec: Exec) -> Result<GramCheck> {
    let wandering = t.wandering()?;
    let gram = gram_residual(t, m, &wandering, max_degree, exec);
    let mode = if t.satisfies_identity(m)?.holds { CoefficientMode::Commuting } else { CoefficientMode::General };
    let coeffs = v_coefficients(t, m, max_degree, mode)?;
    let intertwining = intertwining_residual(t, &coeffs)?;
    Ok(GramCheck { degree: max_degree, gram, intertwining, mode })
}

/// `K_T(z, w) = P_W (1 - ZL)^{-1} (1 - (WL)^*)^{-1} |_W` in a basis of `W(T)`.
pub fn kernel_kt(model: &AnalyticModel, z: &[Complex64], w: &[Complex64]) -> Result<CMatrix> {
    let q = model.wandering.frame();
    let rz = model.resolvent(z)?;
    let rw = model.resolvent(w)?;
    Ok(q.adjoint() * rz * rw.adjoint() * q)
}

/// `max ||gamma_alpha P_W L^alpha T^beta - gamma_{alpha - beta} P_W L^{alpha - beta}||`
/// over `|alpha|, |beta| <= max_degree`, the right side being zero unless
/// `alpha >= beta`.
pub fn cancellation_residual(t: &OperatorTuple, m: usize, max_degree: usize, exec: Exec) -> Result<f64> {
    let l = commuting_l(t, m)?;
    let q = t.wandering()?.frame().adjoint();
    let alphas = enumerate_up_to(t.n(), max_degree);
    let pl: Vec<CMatrix> = alphas.iter().map(|a| &q * l.power(a) * c(gamma_f64(a), 0.0)).collect();
    let tb: Vec<CMatrix> = alphas.iter().map(|b| t.power(b)).collect();
    let pairs: Vec<(usize, usize)> = (0..alphas.len()).flat_map(|a| (0..alphas.len()).map(move |b| (a, b))).collect();
    let devs = exec.map(&pairs, |&(a, b)| {
        let lhs = &pl[a] * &tb[b];
        let diff = match alphas[a].checked_sub(&alphas[b]) {
            Ok(d) => {
                let k = alphas.iter().position(|x| *x == d).expect("difference in range");
                lhs - &pl[k]
            }
            Err(_) => lhs,
        };
        linalg::frobenius(&diff)
    });
    Ok(max_residual(&devs))
}

/// `max ||P_W L^alpha - C(m + |alpha| - 1, |alpha|) P_W T^{*alpha}||` for `|alpha| <= max_degree`.
pub fn adjoint_power_residual(t: &OperatorTuple, m: usize, max_degree: usize) -> Result<f64> {
    let l = commuting_l(t, m)?;
    let w = t.wandering()?;
    adjoint_power_residual_with(t, &l, &w, m, max_degree)
}

pub(crate) fn adjoint_power_residual_with(
    t: &OperatorTuple,
    l: &ColumnL,
    w: &Subspace,
    m: usize,
    max_degree: usize,
) -> Result<f64> {
    let q = w.frame().adjoint();
    let mut worst: f64 = 0.0;
    for alpha in enumerate_up_to(t.n(), max_degree) {
        let k = alpha.degree();
        let coeff = if k == 0 { 1.0 } else { binomial_f64(m + k - 1, k) };
        let diff = &q * l.power(&alpha) - &q * t.adjoint_power(&alpha) * c(coeff, 0.0);
        worst = worst.max(linalg::frobenius(&diff));
    }
    Ok(worst)
}

/// `{x : P_W T^{*alpha} x = 0 for |alpha| <= degree}`.
pub fn annihilator_subspace(t: &OperatorTuple, degree: usize) -> Result<Subspace> {
    let w = t.wandering()?;
    if w.dim() == 0 {
        return Ok(Subspace::full(t.dim()));
    }
    let q = w.frame().adjoint();
    let blocks: Vec<CMatrix> = enumerate_up_to(t.n(), degree).iter().map(|a| &q * t.adjoint_power(a)).collect();
    linalg::kernel(&linalg::block_col(&blocks), t.tolerances().rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{kernel_scalar, KernelMode, TruncatedBergman};
    use crate::linalg::testing::*;
    use crate::optuple::fixtures::*;
    use proptest::prelude::*;

    #[test]
    fn constant_term_is_projection() {
        let j = jordan(3);
        for mode in [CoefficientMode::General, CoefficientMode::Commuting] {
            let cf = v_coefficients(&j, 1, 2, mode).unwrap();
            let c0 = cf.get(&MultiIndex::zero(1)).unwrap();
            assert!((c0.adjoint() * c0 - cf.wandering.project()).norm() < 1e-12);
        }
    }

    #[test]
    fn jordan_coefficients_pick_coordinates() {
        let j = jordan(3);
        let cf = v_coefficients(&j, 1, 2, CoefficientMode::Commuting).unwrap();
        for k in 0..3 {
            let ck = cf.get(&MultiIndex::new(vec![k])).unwrap();
            assert_eq!(ck.shape(), (1, 3));
            for col in 0..3 {
                let expected = if col == k { 1.0 } else { 0.0 };
                assert!((ck[(0, col)].norm() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jordan_intertwining_breaks_past_nilpotency() {
        let j = jordan(3);
        let up_to_2 = v_coefficients(&j, 1, 2, CoefficientMode::General).unwrap();
        assert!(intertwining_residual(&j, &up_to_2).unwrap() < 1e-12);
        let up_to_3 = v_coefficients(&j, 1, 3, CoefficientMode::General).unwrap();
        assert!((intertwining_residual(&j, &up_to_3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wandering_vectors_have_constant_image() {
        let b = TruncatedBergman::new(2, 2, 5, 2).unwrap();
        let t = b.mult_tuple();
        let cf = v_coefficients(&t, 2, 4, CoefficientMode::Commuting).unwrap();
        let q = cf.wandering.frame();
        for (alpha, ca) in &cf.entries {
            let on_w = ca * q;
            if alpha.is_zero() {
                assert!((on_w - linalg::identity(q.ncols())).norm() < 1e-12);
            } else {
                assert!(on_w.norm() < 1e-12, "alpha={alpha}");
            }
        }
    }

    #[test]
    fn modes_agree_on_model_space() {
        let b = TruncatedBergman::new(2, 3, 6, 1).unwrap();
        let t = b.mult_tuple();
        let g = v_coefficients(&t, 3, 4, CoefficientMode::General).unwrap();
        let cm = v_coefficients(&t, 3, 4, CoefficientMode::Commuting).unwrap();
        for ((a, x), (b2, y)) in g.entries.iter().zip(&cm.entries) {
            assert_eq!(a, b2);
            assert!((x - y).norm() < 1e-9);
        }
        assert!(intertwining_residual(&t, &cm).unwrap() < 1e-9);
    }

    #[test]
    fn commuting_mode_requires_identity() {
        let t = OperatorTuple::new(vec![diag(&[c(0.5, 0.0), c(0.2, 0.0)])]).unwrap();
        assert!(v_coefficients(&t, 1, 2, CoefficientMode::Commuting).is_err());
        assert!(v_coefficients(&t, 1, 2, CoefficientMode::General).is_ok());
    }

    #[test]
    fn model_kernel_matches_series() {
        let b = TruncatedBergman::new(2, 2, 10, 1).unwrap();
        let t = b.mult_tuple();
        let model = t.analytic_model(2).unwrap();
        let mut r = rng(71);
        for _ in 0..5 {
            let z: Vec<_> = random_vector(&mut r, 2).iter().map(|x| x * 0.2).collect();
            let w: Vec<_> = random_vector(&mut r, 2).iter().map(|x| x * 0.2).collect();
            let zn = z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let wn = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if zn >= 0.6 || wn >= 0.6 {
                continue;
            }
            let k = kernel_kt(&model, &z, &w).unwrap();
            let series = kernel_scalar(2, 10, &z, &w, KernelMode::Series).unwrap();
            assert!((k[(0, 0)] - series).norm() < 1e-10, "{} vs {}", k[(0, 0)], series);
        }
    }

    #[test]
    fn kernel_at_origin_is_identity() {
        let j = jordan(3);
        let model = j.analytic_model(1).unwrap();
        let k = kernel_kt(&model, &[c(0.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert!((k - linalg::identity(1)).norm() < 1e-15);
    }

    #[test]
    fn model_space_cancellation_and_adjoint_powers() {
        for m in 1..=3 {
            let b = TruncatedBergman::new(2, m, 7, 1).unwrap();
            let t = b.mult_tuple();
            assert!(cancellation_residual(&t, m, 3, Exec::default()).unwrap() < 1e-8, "m={m}");
            assert!(adjoint_power_residual(&t, m, 4).unwrap() < 1e-9, "m={m}");
        }
    }

    #[test]
    fn annihilator_is_h_infinity() {
        let mut r = rng(72);
        let s = spherical_coisometry(&mut r, 3, 2);
        let t = s.direct_sum(&TruncatedBergman::new(2, 1, 3, 1).unwrap().mult_tuple()).unwrap();
        let h = t.h_infinity().unwrap().subspace;
        let a = annihilator_subspace(&t, 4).unwrap();
        assert_eq!(a.dim(), h.dim());
        assert!(a.principal_angle_sines(&h).unwrap().unwrap()[0] < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn kernel_is_hermitian_symmetric(seed in any::<u64>(), n in 1usize..3, k in 1usize..4) {
            let mut r = rng(seed);
            let s = spherical_coisometry(&mut r, 2, n);
            let b = TruncatedBergman::new(n, 1, k, 1).unwrap();
            let t = s.direct_sum(&b.mult_tuple()).unwrap();
            let model = t.analytic_model(1).unwrap();
            let radius = 1.0 / model.l.norm;
            let z: Vec<_> = random_vector(&mut r, n).iter().map(|x| x * (0.2 * radius / (n as f64 + 1.0))).collect();
            let w: Vec<_> = random_vector(&mut r, n).iter().map(|x| x * (0.2 * radius / (n as f64 + 1.0))).collect();
            if let (Ok(a), Ok(b2)) = (kernel_kt(&model, &z, &w), kernel_kt(&model, &w, &z)) {
                prop_assert!((a - b2.adjoint()).norm() < 1e-10);
            }
        }
    }
}
