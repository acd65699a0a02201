use alloc::string::String;

/// Every failure the core library can report.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate normal")]
    DegenerateNormal,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("unnormalized coordinate {0}")]
    UnnormalizedCoordinate(f64),
    #[error("non-finite input")]
    NonFinite,
    #[error("query kind `{kind}` is not accepted by the {oracle} oracle")]
    UnsupportedQuery { kind: &'static str, oracle: &'static str },
    #[error("budget exceeded: adversary guarantee void")]
    BudgetExceeded,
    #[error("fatness too large for current level")]
    FatnessTooLarge,
    #[error("capacity accounting bug: numerically empty null space")]
    EmptyNullspace,
    #[error("no surviving orthant")]
    NoSurvivor,
    #[error("lower-bound guarantee expired: every fiber is over budget")]
    GuaranteeExpired,
    #[error("brute-force enumeration is limited to d <= {0}")]
    TooLarge(usize),
    #[error("query budget exhausted")]
    QueryBudgetExhausted,
    #[error("record {0} already carries a different realized normal")]
    AlreadyRealized(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
