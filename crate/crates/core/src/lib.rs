//! Deterministic LP-rounding engine for uniform hard-capacitated facility problems.
//!
//! Three problems share one pipeline skeleton:
//!
//! * capacitated knapsack median ([`ckm::solve_ckm`]): budget violated by at most
//!   the largest opened facility cost, capacities by `2 + 4/(l-1)`;
//! * capacitated facility location ([`cflp::solve_cflp`]): capacities violated by `1 + eps`;
//! * capacitated k-facility location ([`ckflp::solve_ckflp`]): cardinality respected exactly,
//!   capacities violated by `2 + 4/(l-1)`.
//!
//! Every guarantee the rounding relies on is evaluated on the actual input and reported
//! as a [`report::Check`]; [`oracle`] holds exact brute-force solvers used as ground truth.

pub mod cflp;
pub mod ckflp;
pub mod ckm;
pub mod cli;
pub mod clustering;
pub mod error;
pub mod hierarchy;
pub mod instance;
pub mod oracle;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
pub use instance::{Instance, Problem};

/// Absolute tolerance for comparisons against proven bounds.
pub const BOUND_TOL: f64 = 1e-9;

/// Tolerance for integrality and tightness decisions on LP output.
pub const LP_TOL: f64 = 1e-7;

/// `floor(x)` that treats values within [`LP_TOL`] below an integer as that integer.
pub fn floor_tol(x: f64) -> f64 {
    (x + LP_TOL).floor()
}

/// Filtering radius multiplier for a target capacity slack `eps`: `max(2, ceil(4/eps) + 1)`.
pub fn l_from_eps(eps: f64) -> usize {
    let l = (4.0 / eps).ceil() as usize + 1;
    l.max(2)
}

/// Capacity violation factor `2 + 4/(l-1)` of the knapsack-median rounding.
pub fn capacity_factor(l: usize) -> f64 {
    2.0 + 4.0 / (l as f64 - 1.0)
}

/// Connection-cost factor `l(2l+13) + (2 + 4/(l-1))(2l+13) + 2(l+1)`.
pub fn alpha(l: usize) -> f64 {
    let lf = l as f64;
    let w = 2.0 * lf + 13.0;
    lf * w + capacity_factor(l) * w + 2.0 * (lf + 1.0)
}

/// Cost factor a solution is checked against: `α(l)` for the knapsack median,
/// `α(l) + 2(2l+14)` for k-facility location and `20 + 6/ε` for facility location.
pub fn cost_factor(problem: instance::Problem, l: usize, eps: f64) -> f64 {
    match problem {
        instance::Problem::Ckm => alpha(l),
        instance::Problem::Ckflp => alpha(l) + 2.0 * (2.0 * l as f64 + 14.0),
        instance::Problem::Cflp => 20.0 + 6.0 / eps,
    }
}
