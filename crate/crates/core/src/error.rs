use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty support")]
    EmptySupport,

    #[error("infeasible on support (residual {residual:.3e})")]
    InfeasibleOnSupport { residual: f64 },

    #[error("too large for exhaustive enumeration: {count} candidates exceeds limit {limit}")]
    TooLarge { count: u128, limit: u128 },

    #[error("instance is infeasible")]
    Infeasible,

    #[error("boundary contact: coordinate {0} is zero")]
    BoundaryContact(usize),

    #[error("non-finite value produced at step {0}")]
    NonFinite(usize),

    #[error("trajectory diverged at step {step}: |x|_inf = {norm:.3e} exceeds {limit:.3e}")]
    Diverged { step: usize, norm: f64, limit: f64 },

    #[error("demands are not balanced (sum = {0})")]
    UnbalancedDemands(f64),

    #[error("arc {arc} has non-positive cost {cost}")]
    NonPositiveCost { arc: usize, cost: f64 },

    #[error("ladder family requires f >= 2, got {0}")]
    LadderParameter(u32),

    #[error("entry analysis requires c2 > c1 > 0")]
    CostOrder,

    #[error("critical regime: the linearized analysis is inconclusive")]
    Inconclusive,

    #[error("insufficient tail data: {found} states in window, need {needed}")]
    InsufficientTail { found: usize, needed: usize },

    #[error("operation requires m = 2 variables, got {0}")]
    NotPlanar(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
