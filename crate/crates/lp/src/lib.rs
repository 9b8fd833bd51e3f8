//! Exact rational linear programming.
//!
//! A dense two-phase tableau simplex using Bland's rule, a transportation
//! front end with optional support masks, and a Gauss–Jordan helper.

use thiserror::Error;

mod linsys;
mod program;
mod simplex;
mod transport;

pub use linsys::gauss_solve;
pub use program::{r, Bound, Constraint, LinearProgram, Rational, Relation, Sense};
pub use simplex::{solve_lp, LpSolution, LpStatus};
pub use transport::{solve_transport, TransportInstance, TransportSolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("row {row:?} has width {got}, expected {expected}")]
    Width { row: Option<usize>, expected: usize, got: usize },
    #[error("variable {0} has upper bound below its lower bound")]
    EmptyBound(usize),
    #[error("{0} is not a probability distribution")]
    NotDistribution(&'static str),
    #[error("{0} matrix has the wrong shape")]
    Shape(&'static str),
}
