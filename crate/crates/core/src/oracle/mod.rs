//! Ground-truth solvers: subset enumeration for the three problems and an exact rational LP.

pub mod exact;
pub mod rational;

pub use exact::{exact_cflp, exact_ckflp, exact_ckm, ExactSolution, MAX_ORACLE_FACILITIES};
pub use rational::{active_rank, rational_lp_solve, rational_rank, RationalSolution};
