use thiserror::Error;

use crate::critical::BaseMetricResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid index group {group:?}: {reason}")]
    InvalidIndexGroup { group: Vec<usize>, reason: String },

    #[error("invalid contraction: {0}")]
    InvalidContraction(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate bilinear form (condition number {cond:e}, bound {bound:e})")]
    DegenerateForm { cond: f64, bound: f64 },

    #[error("tensor equation order {0} is invalid, need N >= 2")]
    InvalidOrder(usize),

    #[error("least-squares system has {unknowns} unknowns, limit is {limit}")]
    ProblemTooLarge { unknowns: usize, limit: usize },

    #[error("derivative order {requested} exceeds available jet order {available}")]
    OrderExceeded { requested: usize, available: usize },

    #[error("jets are expanded around different base points or bases")]
    BaseMismatch,

    #[error("field spec parse error: {0}")]
    SpecParse(String),

    #[error("field spec dimension error: {0}")]
    SpecDimension(String),

    #[error("cannot complete a dual frame from the zero co-vector")]
    ZeroCovector,

    #[error("condition (i) violated: pairing <X,Y> = {pairing:e} is not positive at {point:?}")]
    NonPositivePairing { pairing: f64, point: Vec<f64> },

    #[error("base point is not critical: |Y| = {y_norm:e}, |X| = {x_norm:e}, tolerance {tol:e}")]
    NotCritical { y_norm: f64, x_norm: f64, tol: f64 },

    #[error(
        "condition (iii) violated: no compatible scalar product (asymmetry {:e}, min eigenvalue {:e})",
        .0.asym_defect,
        .0.min_eigenvalue
    )]
    ConditionThreeViolated(Box<BaseMetricResult>),

    #[error("condition (ii) violated: Y vanishes at {point:?} but |X| = {x_norm:e}")]
    ConditionTwoViolated { point: Vec<f64>, x_norm: f64 },

    #[error("degenerate critical point near {point:?} (Jacobian condition {condition:e})")]
    DegenerateCritical { point: Vec<f64>, condition: f64 },

    #[error("base metric is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("series of order {order} is too short, need at least {required}")]
    SeriesTooShort { order: usize, required: usize },

    #[error("{} sample points are not covered by any chart", .0.len())]
    CoverageGap(Vec<Vec<f64>>),

    #[error("atlas construction failed: {0}")]
    Atlas(String),
}
