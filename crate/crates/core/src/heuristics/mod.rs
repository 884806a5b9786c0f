//! Delete-relaxation heuristics.

pub mod additive;
pub mod relaxed;

pub use additive::{DeleteRelaxation, HeuristicReport};
pub use relaxed::{RelaxedOp, RelaxedTask};
