use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision too low: {0}")]
    PrecisionTooLow(String),
    #[error("exponent overflow")]
    Overflow,
    #[error("exponent underflow")]
    Underflow,
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("n*p*(1-p) = {npq:.4} is below the rejection threshold {threshold}")]
    RegionTooSmall { npq: f64, threshold: f64 },
    #[error("hat does not dominate the target: max ratio {ratio:.4} exceeds {limit}")]
    DominationFailure { ratio: f64, limit: f64 },
    #[error("calibration unstable: {0}")]
    CalibrationUnstable(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("support mismatch: {0} vs {1}")]
    SupportMismatch(usize, usize),
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("bound {bound:e} exceeds requested delta_in {delta_in:e}")]
    BudgetExceeded { bound: f64, delta_in: f64 },
    #[error("budget exhausted at charge '{label}': accumulated {accumulated:e} + {bound:e} > budget {budget:e}")]
    BudgetOverrun { label: String, accumulated: f64, bound: f64, budget: f64 },
    #[error("delta_in {delta_in:e} is at or below the Lanczos floor 15*zeta = {floor:e}; no precision suffices, use more Lanczos terms")]
    ZetaFloor { delta_in: f64, floor: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("requested {requested} distinct solutions but the clause has only {available}")]
    CountTooLarge { requested: u64, available: String },
    #[error("too many variables for enumeration: {0}")]
    TooManyVariables(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
