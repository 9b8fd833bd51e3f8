//! Fixpoint certification over MV-chain valuations.
//!
//! - [`mv`]: MV-chains, universes, subsets, valuations, norms and supports.
//! - [`nonexp`]: non-expansive combinators, `α`/`γ`, approximations and `ι̂`.
//! - [`proof`]: powerset fixpoints, proof rules and jumps.

pub mod gen;
pub mod mv;
pub mod nonexp;
pub mod proof;
pub mod setfn;

pub use mv::{q, Chain, MvError, MvValue, Rational, SubsetY, Universe, Valuation};
pub use nonexp::{Approximable, BasicFn, Direction, Distribution, FnError, FnExpr, Shift, UnionPart, ValuationFn};
pub use proof::{Certificate, Jump, ProofError, Verdict};
pub use setfn::SetFn;
