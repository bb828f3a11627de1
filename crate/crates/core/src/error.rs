use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {lhs} {relation} {rhs} does not hold ({context})")]
    Inequality { context: String, lhs: String, relation: &'static str, rhs: String },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("tridiagonal QL iteration did not converge")]
    EigenNoConvergence,
    #[error("Lanczos did not converge after {iterations} iterations (best residual {best_residual:e}, {converged} of {requested} pairs converged)")]
    LanczosNoConvergence { iterations: usize, best_residual: f64, converged: usize, requested: usize },
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: u128, cap: usize },
    #[error("edge type {0} has no assigned projector")]
    MissingAssignment(u32),
    #[error("vector length {got} does not match operator dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gap undetermined: enlarge k")]
    GapUndetermined,
    #[error("gap undefined: zero operator")]
    ZeroOperator,
    #[error("graph with {vertices} vertices exceeds the exact enumeration budget of {budget}")]
    EnumerationBudget { vertices: usize, budget: usize },
    #[error("positivity of the hard-core partition function could not be certified: {0}")]
    PositivityNotCertified(String),
    #[error("state is not normalized (norm {norm})")]
    Unnormalized { norm: f64 },
    #[error("retry limit exceeded: {0}")]
    RetryLimit(String),
}

impl Error {
    pub(crate) fn inequality(
        context: impl Into<String>,
        lhs: impl core::fmt::Display,
        relation: &'static str,
        rhs: impl core::fmt::Display,
    ) -> Self {
        use alloc::string::ToString;
        Error::Inequality { context: context.into(), lhs: lhs.to_string(), relation, rhs: rhs.to_string() }
    }
}
