use thiserror::Error;

/// Failures raised by the numeric and combinatorial routines.
///
/// Hypothesis failures of the decomposition pipeline are not errors; they are
/// reported inside [`crate::wold::WoldReport`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operators {i} and {j} do not commute (residual {residual:.3e})")]
    NotCommuting { i: usize, j: usize, residual: f64 },

    #[error("multi-index subtraction produced a negative component")]
    NegativeComponent,

    #[error("degree cap exceeded: |alpha| = {degree} > {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("{what} budget exceeded (limit {limit})")]
    BudgetExceeded { what: &'static str, limit: usize },

    #[error("operator does not leave the subspace invariant (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("operator is singular on the subspace (smallest singular value {sigma_min:.3e})")]
    SingularOnSubspace { sigma_min: f64 },

    #[error("row operator rank-deficient beyond tolerance band (singular value {sigma:.3e} near threshold {threshold:.3e})")]
    RankAmbiguous { sigma: f64, threshold: f64 },

    #[error("L-tuple not commuting (residual {residual:.3e})")]
    LTupleNotCommuting { residual: f64 },

    #[error("L-tuple forms disagree (residual {residual:.3e})")]
    LFormsDisagree { residual: f64 },

    #[error("point outside the model domain (|z|*|L| = {product:.6})")]
    OutsideDomain { product: f64 },

    #[error("kernel singularity: |1 - <z,w>| = {distance:.3e}")]
    KernelSingularity { distance: f64 },

    #[error("not an m-hypercontraction: defect of order {order} has eigenvalue {eigenvalue:.3e}")]
    NotHypercontraction { order: usize, eigenvalue: f64 },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
