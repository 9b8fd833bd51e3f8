use mvfix_core::{FnError, MvError, ProofError};
use mvfix_lp::{LpError, LpStatus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GameError {
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
    #[error("{0}")]
    TooLarge(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl GameError {
    pub fn invalid(field: impl Into<String>, msg: impl Into<String>) -> GameError {
        GameError::Invalid { field: field.into(), msg: msg.into() }
    }
}

impl From<GameError> for FnError {
    fn from(e: GameError) -> FnError {
        match e {
            GameError::Fn(f) => f,
            GameError::Mv(m) => FnError::Mv(m),
            other => FnError::Precondition(other.to_string()),
        }
    }
}
