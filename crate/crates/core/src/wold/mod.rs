//! The decomposition pipeline: `H = H_infinity ⊕ [W(T)]`, the coefficients
//! of the model map `V`, the Gram comparison against the weights
//! `1 / rho_m(alpha)`, the model kernel `K_T`, the dilation map `j`, and the
//! classification of pure tuples.

mod classify;
mod coefficients;
mod dilation;

pub use classify::{classify_pure, PureClassification};
pub use coefficients::{
    adjoint_power_residual, annihilator_subspace, cancellation_residual, intertwining_residual, kernel_kt,
    u_gram_check, v_coefficients, CoefficientMode, Coefficients, GramCheck,
};
pub use dilation::{dilation_j, Dilation};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::{max_residual, Exec};
use crate::linalg::{self, CMatrix, Subspace};
use crate::multiindex::{enumerate_up_to, rho_f64, MultiIndex};
use crate::optuple::{IdentityCheck, OperatorTuple, Predicates, ProbeConfig, RegularityReport, RegularityVerdict};

/// Cap on the default Gram degree.
pub const DEFAULT_MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hypothesis {
    RowContraction,
    Identity,
    Regularity,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::RowContraction => "row_contraction",
            Hypothesis::Identity => "identity",
            Hypothesis::Regularity => "regularity",
        }
    }
}

/// Outcome of [`decompose`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// All hypotheses hold and every residual is within tolerance.
    Consistent,
    HypothesesViolated(Vec<Hypothesis>),
    /// Hypotheses hold but some residual exceeds its tolerance.
    TruncationLimited,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Consistent => write!(f, "theorem_3_7_consistent"),
            Verdict::TruncationLimited => write!(f, "truncation_limited"),
            Verdict::HypothesesViolated(list) => {
                let names: Vec<_> = list.iter().map(|h| h.as_str()).collect();
                write!(f, "hypotheses_violated({})", names.join(","))
            }
        }
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "theorem_3_7_consistent" => return Ok(Verdict::Consistent),
            "truncation_limited" => return Ok(Verdict::TruncationLimited),
            _ => {}
        }
        let inner = s
            .strip_prefix("hypotheses_violated(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown verdict `{s}`")))?;
        let mut list = Vec::new();
        for name in inner.split(',').map(str::trim) {
            list.push(match name {
                "row_contraction" => Hypothesis::RowContraction,
                "identity" => Hypothesis::Identity,
                "regularity" => Hypothesis::Regularity,
                other => return Err(Error::InvalidParameter(format!("unknown hypothesis `{other}`"))),
            });
        }
        list.sort();
        list.dedup();
        if list.is_empty() {
            return Err(Error::InvalidParameter("empty hypothesis list".into()));
        }
        Ok(Verdict::HypothesesViolated(list))
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone)]
pub struct WoldConfig {
    pub m: usize,
    /// `None` selects `min(8, orbit stabilization index)`.
    pub max_degree: Option<usize>,
    pub probe: ProbeConfig,
    pub exec: Exec,
}

impl WoldConfig {
    pub fn new(m: usize) -> Self {
        WoldConfig { m, max_degree: None, probe: ProbeConfig::default(), exec: Exec::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residuals {
    pub identity: f64,
    /// `max_i max(||(1 - P) T_i P||, ||P T_i (1 - P)||)` for `P = P_{H_infinity}`.
    pub reducing: f64,
    /// `||P (sum_i T_i T_i^*) P - P||` on `H_infinity`.
    pub coisometry: f64,
    /// Largest Gram deviation over the tested degrees.
    pub gram: f64,
    /// `||P_{H_infinity} P_{[W(T)]}||`.
    pub orthogonality: f64,
    /// Largest principal angle sine between `[W(T)]` and `H_infinity^⊥`, or 1 if
    /// their dimensions differ.
    pub complement: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Dims {
    #[serde(rename = "H_inf")]
    pub h_inf: usize,
    pub orbit: usize,
    pub wandering: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct WoldReport {
    pub m: usize,
    pub predicates: Predicates,
    pub identity: IdentityCheck,
    pub regularity: RegularityReport,
    pub dims: Dims,
    pub residuals: Residuals,
    pub gram_degree: usize,
    pub h_infinity_stabilization: usize,
    pub orbit_stabilization: usize,
    pub verdict: Verdict,
    #[serde(skip)]
    pub h_infinity: Subspace,
    #[serde(skip)]
    pub orbit: Subspace,
    #[serde(skip)]
    pub wandering: Subspace,
}

/// `max |<T^alpha x_p, T^beta x_q> - delta_{alpha beta} delta_{pq} / rho_m(alpha)|`
/// over `|alpha|, |beta| <= degree` for an orthonormal basis `x_p` of `W`.
pub fn gram_residual(t: &OperatorTuple, m: usize, w: &Subspace, degree: usize, exec: Exec) -> f64 {
    if w.dim() == 0 {
        return 0.0;
    }
    let alphas = enumerate_up_to(t.n(), degree);
    let images = orbit_images(t, &alphas, w.frame(), exec);
    let pairs: Vec<(usize, usize)> =
        (0..alphas.len()).flat_map(|a| (a..alphas.len()).map(move |b| (a, b))).collect();
    let devs = exec.map(&pairs, |&(a, b)| {
        let g = images[a].adjoint() * &images[b];
        let mut expected = linalg::zeros(g.nrows(), g.ncols());
        if a == b {
            expected.fill_with_identity();
            expected /= linalg::c(rho_f64(m, &alphas[a]), 0.0);
        }
        (g - expected).iter().map(|z| z.norm()).fold(0.0, f64::max)
    });
    max_residual(&devs)
}

/// `T^alpha F` for graded `alphas`, each built from its predecessor one degree down.
fn orbit_images(t: &OperatorTuple, alphas: &[MultiIndex], frame: &CMatrix, exec: Exec) -> Vec<CMatrix> {
    let index: HashMap<&MultiIndex, usize> = alphas.iter().enumerate().map(|(k, a)| (a, k)).collect();
    let mut images: Vec<CMatrix> = Vec::with_capacity(alphas.len());
    let mut start = 0;
    while start < alphas.len() {
        let deg = alphas[start].degree();
        let end = alphas[start..].iter().position(|a| a.degree() != deg).map_or(alphas.len(), |p| start + p);
        let level = exec.map(&alphas[start..end], |a| {
            match (0..a.n()).find_map(|i| a.sub_unit(i).map(|prev| (i, prev))) {
                Some((i, prev)) => t.op(i) * &images[index[&prev]],
                None => frame.clone(),
            }
        });
        images.extend(level);
        start = end;
    }
    images
}

fn reducing_residual(t: &OperatorTuple, s: &Subspace) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for op in t.ops() {
        worst = worst.max(s.invariance_residual(op)?);
        worst = worst.max(s.invariance_residual(&op.adjoint())?);
    }
    Ok(worst)
}

pub fn decompose(t: &OperatorTuple, cfg: &WoldConfig) -> Result<WoldReport> {
    if cfg.m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    let tol = t.tolerances();
    let (predicates, _) = t.predicates()?;
    let identity = t.satisfies_identity(cfg.m)?;
    let regularity = t.regularity_probe(&cfg.probe)?;
    let h_chain = t.h_infinity()?;
    let wandering = t.wandering()?;
    let orbit_chain = t.orbit_span(&wandering)?;
    let (h_inf, orbit) = (h_chain.subspace, orbit_chain.subspace);

    let orthogonality = if h_inf.dim() == 0 || orbit.dim() == 0 {
        0.0
    } else {
        linalg::spectral_norm(&(h_inf.frame().adjoint() * orbit.frame()))?
    };
    let complement = match orbit.principal_angle_sines(&h_inf.ortho_complement()?)? {
        Some(s) => s.first().copied().unwrap_or(0.0),
        None => 1.0,
    };
    let reducing = reducing_residual(t, &h_inf)?;
    let coisometry = if h_inf.dim() == 0 {
        0.0
    } else {
        let q = h_inf.frame();
        let s = q.adjoint() * t.sigma(&linalg::identity(t.dim())) * q;
        linalg::spectral_norm(&(s - linalg::identity(q.ncols())))?
    };
    let gram_degree = cfg.max_degree.unwrap_or(DEFAULT_MAX_DEGREE.min(orbit_chain.stabilization_index));
    let gram = gram_residual(t, cfg.m, &wandering, gram_degree, cfg.exec);

    let mut violated = Vec::new();
    if !predicates.row_contraction {
        violated.push(Hypothesis::RowContraction);
    }
    if !identity.holds {
        violated.push(Hypothesis::Identity);
    }
    if regularity.verdict == RegularityVerdict::NotRegular {
        violated.push(Hypothesis::Regularity);
    }
    let within = |x: f64, bound: f64| x.is_finite() && x <= bound;
    let verdict = if !violated.is_empty() {
        Verdict::HypothesesViolated(violated)
    } else if within(reducing, tol.identity)
        && within(coisometry, tol.identity)
        && within(orthogonality, tol.identity)
        && within(gram, tol.gram)
        && h_inf.dim() + orbit.dim() == t.dim()
    {
        Verdict::Consistent
    } else {
        Verdict::TruncationLimited
    };

    Ok(WoldReport {
        m: cfg.m,
        dims: Dims { h_inf: h_inf.dim(), orbit: orbit.dim(), wandering: wandering.dim(), total: t.dim() },
        residuals: Residuals { identity: identity.residual, reducing, coisometry, gram, orthogonality, complement },
        predicates,
        identity,
        regularity,
        gram_degree,
        h_infinity_stabilization: h_chain.stabilization_index,
        orbit_stabilization: orbit_chain.stabilization_index,
        verdict,
        h_infinity: h_inf,
        orbit,
        wandering,
    })
}
