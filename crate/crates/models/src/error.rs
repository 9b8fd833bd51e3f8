use mvfix_core::{FnError, MvError, ProofError};
use mvfix_lp::{LpError, LpStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Mv(#[from] MvError),
    #[error(transparent)]
    Fn(#[from] FnError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error("{field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("linear program unexpectedly {0:?}")]
    Solver(LpStatus),
    #[error("valuation is not a fixpoint")]
    NotAFixpoint,
    #[error("{0}")]
    TooLarge(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ModelError {
    pub fn invalid(field: impl Into<String>, msg: impl Into<String>) -> ModelError {
        ModelError::Invalid { field: field.into(), msg: msg.into() }
    }
}

impl From<ModelError> for FnError {
    fn from(e: ModelError) -> FnError {
        match e {
            ModelError::Fn(f) => f,
            ModelError::Mv(m) => FnError::Mv(m),
            other => FnError::Precondition(other.to_string()),
        }
    }
}
