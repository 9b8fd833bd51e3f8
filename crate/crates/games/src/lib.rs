//! Simple stochastic games as least fixpoints of a non-expansive value function.

mod error;
pub mod gen;
pub mod io;
mod model;
pub mod solve;
pub mod suite;

pub use error::GameError;
pub use model::{Node, Player, Ssg, Strategy};
pub use solve::{
    brute_force_value, forced_cycle_nodes, kleene_value_iteration, lfp_fixed_max, lfp_fixed_min, strategy_iteration_above,
    strategy_iteration_below, switch_max, switch_min, Kleene, Solution, Stats,
};
