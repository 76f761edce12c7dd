use thiserror::Error;

/// Errors produced by generators, samplers and oracles.
#[derive(Error, Debug)]
pub enum Error {
    /// A size parameter is out of range or the object would exceed the size budget.
    #[error("size error: {0}")]
    Size(String),

    /// An input failed validation (bad weights, mismatched lengths, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Rejection sampling exhausted its retry budget.
    #[error("sampling error: {0}")]
    Sampling(String),

    /// A sampled object is too degenerate to be useful; resampling is advised.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// A structural precondition does not hold for the given input.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// The requested quantity is not defined for this input.
    #[error("domain error: {0}")]
    Domain(String),

    /// A simulation exceeded its step budget.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// A trace was requested over a set the trajectory never visits.
    #[error("empty trace: {0}")]
    EmptyTrace(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
