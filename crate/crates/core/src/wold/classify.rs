use serde::Serialize;

use super::{gram_residual, v_coefficients, CoefficientMode, DEFAULT_MAX_DEGREE};
use crate::error::Result;
use crate::exec::Exec;
use crate::linalg::{self, c};
use crate::multiindex::rho_f64;
use crate::optuple::{OperatorTuple, ProbeConfig, RegularityVerdict, Trivalent};

/// The four equivalent characterizations of pure tuples, evaluated
/// independently so that disagreements on non-regular inputs become visible.
#[derive(Debug, Clone, Serialize)]
pub struct PureClassification {
    /// `H_infinity = {0}`.
    pub analytic: bool,
    /// `sum_alpha c_alpha^* c_alpha / rho_m(alpha) = 1` up to `degree`.
    pub norm_identity: bool,
    pub norm_identity_residual: f64,
    pub c_dot_0: Trivalent,
    /// `[W(T)] = H` with the wandering orbit Gram matching the model weights.
    pub shift_model: bool,
    pub shift_gram_residual: f64,
    pub degree: usize,
    pub coefficient_mode: CoefficientMode,
    pub agree: bool,
    pub regularity: RegularityVerdict,
    /// Set when the tuple failed the regularity probe, so agreement or
    /// disagreement carries no weight.
    pub flagged: bool,
}

pub fn classify_pure(t: &OperatorTuple, m: usize, probe: &ProbeConfig, exec: Exec) -> Result<PureClassification> {
    let tol = t.tolerances();
    let h_inf = t.h_infinity()?.subspace;
    let wandering = t.wandering()?;
    let orbit = t.orbit_span(&wandering)?;
    let degree = DEFAULT_MAX_DEGREE.min(orbit.stabilization_index);

    let mode = if t.satisfies_identity(m)?.holds { CoefficientMode::Commuting } else { CoefficientMode::General };
    let coeffs = v_coefficients(t, m, degree, mode)?;
    let mut parseval = linalg::zeros(t.dim(), t.dim());
    for (alpha, ca) in &coeffs.entries {
        parseval += ca.adjoint() * ca * c(1.0 / rho_f64(m, alpha), 0.0);
    }
    let norm_identity_residual = linalg::frobenius(&(parseval - linalg::identity(t.dim())));

    let shift_gram_residual = gram_residual(t, m, &wandering, degree, exec);
    let shift_model = orbit.subspace.dim() == t.dim() && shift_gram_residual <= tol.gram;

    let analytic = h_inf.dim() == 0;
    let norm_identity = norm_identity_residual <= tol.gram;
    let c_dot_0 = t.c_dot_0().verdict;
    let as_tri = |b: bool| Trivalent::from(b);
    let agree = [as_tri(analytic), as_tri(norm_identity), as_tri(shift_model)].iter().all(|&x| x == c_dot_0);
    let regularity = t.regularity_probe(probe)?.verdict;
    Ok(PureClassification {
        analytic,
        norm_identity,
        norm_identity_residual,
        c_dot_0,
        shift_model,
        shift_gram_residual,
        degree,
        coefficient_mode: mode,
        agree,
        regularity,
        flagged: regularity == RegularityVerdict::NotRegular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::testing::*;
    use crate::optuple::fixtures::*;

    fn classify(t: &OperatorTuple, m: usize) -> PureClassification {
        classify_pure(t, m, &ProbeConfig::default(), Exec::default()).unwrap()
    }

    #[test]
    fn coisometry_fails_all_four() {
        let mut r = rng(91);
        let p = classify(&spherical_coisometry(&mut r, 3, 2), 2);
        assert!(!p.analytic && !p.norm_identity && !p.shift_model);
        assert_eq!(p.c_dot_0, Trivalent::False);
        assert!(p.agree && !p.flagged);
    }

    #[test]
    fn jordan_passes_all_four_but_is_flagged() {
        let p = classify(&jordan(3), 1);
        assert!(p.analytic && p.norm_identity && p.shift_model);
        assert_eq!(p.c_dot_0, Trivalent::True);
        assert!(p.agree && p.flagged);
        assert_eq!(p.regularity, RegularityVerdict::NotRegular);
    }

    #[test]
    fn zero_tuple_is_degenerately_pure() {
        for m in 1..=3 {
            let p = classify(&OperatorTuple::zero(2, 3), m);
            assert!(p.analytic && p.norm_identity && p.shift_model, "m={m}");
            assert_eq!(p.c_dot_0, Trivalent::True);
        }
    }
}
