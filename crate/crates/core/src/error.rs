use thiserror::Error;

/// Errors produced by state construction, channel application, region
/// optimization, and the coding simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("register groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("{0}")]
    Domain(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("leakage budget {budget} bits is infeasible: best achievable leakage found is {best} bits")]
    InfeasibleBudget { budget: f64, best: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
