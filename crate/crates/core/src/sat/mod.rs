//! Propositional engine over the Boolean skeleton.

mod index;
mod solver;

pub use index::{satisfies_all_clauses, SatisfactionIndex};
pub use solver::{SatResult, SatSolver, SatStats};
