//! Computational substrate: an extreme-point LP solver and an integral min-cost-flow solver.

pub mod flow;
pub mod lp;

pub use flow::{min_cost_assignment, FlowNetwork, FlowSolution};
pub use lp::{solve_extreme, LpModel, LpSolution, Sense, VarStatus};
