use thiserror::Error;

/// Crate-wide error type. Variants map to the distinct failure classes the
/// library distinguishes: caller misuse, domain violations, resource caps,
/// oracle-session faults and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("element {0} is outside the domain")]
    OutOfDomain(String),

    #[error("enumeration cap exceeded: {cardinality} elements, cap {cap}")]
    EnumerationCap { cardinality: u64, cap: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("query budget exhausted after {used} queries (max {max})")]
    BudgetExhausted { used: u64, max: u64 },

    #[error("tolerance {xi} is below the session minimum {min}")]
    ToleranceTooSmall { xi: f64, min: f64 },

    #[error("candidate predicate set would become empty")]
    AdversaryExhausted,

    #[error("oracle undefined: the positive set is empty")]
    EmptyPositiveSet,

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("no dictator coordinate found (best correlation {best})")]
    NoDictatorFound { best: f64 },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
