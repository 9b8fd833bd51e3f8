//! Concrete fixpoint problems over exact valuations.
//!
//! Termination probabilities of Markov chains, branching distances of metric
//! transition systems, bisimilarity, and behavioural distances of
//! probabilistic automata, each with a direct evaluator and a closed-form
//! approximation.

mod error;

pub mod bisim;
pub mod gen;
pub mod hausdorff;
pub mod io;
pub mod kantorovich;
pub mod markov;
pub mod mts;
pub mod pa;
pub mod pairs;

pub use bisim::TransitionSystem;
pub use error::ModelError;
pub use hausdorff::{hausdorff, HausdorffLifting};
pub use kantorovich::{kantorovich, kantorovich_dual_member, KantorovichLifting};
pub use markov::MarkovChain;
pub use mts::MetricTS;
pub use pa::ProbAutomaton;
pub use pairs::PairSpace;
