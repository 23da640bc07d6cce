use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pointwise basis evaluation is only available on S^2, got d = {dim_d}")]
    UnsupportedDimension { dim_d: usize },

    #[error("degree {requested} exceeds the supported cap {cap}")]
    DegreeCap { requested: usize, cap: usize },

    #[error("exact integer arithmetic overflowed while computing {context}")]
    IntegerOverflow { context: &'static str },

    #[error("root finding did not converge after {iterations} iterations (m = {m})")]
    NonConvergence { m: usize, iterations: usize },

    #[error("point is not on the unit sphere: |1 - ||x||| = {defect:e}")]
    NotOnSphere { defect: f64 },

    #[error("rule exactness {actual} is below the required {required}")]
    ExactnessShortfall { required: usize, actual: usize },

    #[error("node-aligned samples were taken under a different rule (expected fingerprint {expected:016x}, got {got:016x})")]
    RuleMismatch { expected: u64, got: u64 },

    #[error("sample length {got} does not match the rule's node count {expected}")]
    SampleLength { expected: usize, got: usize },

    #[error("function value at node {node} is not finite")]
    NonFiniteSample { node: usize },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("invalid operator description: {0}")]
    InvalidSpec(String),

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("unknown test function '{0}'")]
    UnknownFunction(String),

    #[error("check is not applicable: {0}")]
    NotApplicable(String),

    #[error("coefficient vector of degree {coeff_degree} cannot feed an operator of degree {spec_degree}")]
    DegreeMismatch {
        coeff_degree: usize,
        spec_degree: usize,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
