//! The natural LP relaxation shared by all three problems.
//!
//! Variables are laid out as `y_0..y_{n-1}` followed by `x_ij` at `n + i*m + j`.

use serde::Serialize;

use crate::instance::{Instance, Problem};
use crate::solvers::lp::{solve_extreme, LpModel, Sense};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FractionalSolution {
    pub n_facilities: usize,
    pub n_clients: usize,
    /// Row-major `x[i * m + j]`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Optimal LP value (connection cost only for the knapsack median).
    pub objective: f64,
    pub connection_cost: f64,
    pub facility_cost: f64,
}

impl FractionalSolution {
    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n_clients + j]
    }

    /// Total demand served by facility `i`.
    pub fn load(&self, i: usize) -> f64 {
        self.x[i * self.n_clients..(i + 1) * self.n_clients].iter().sum()
    }

    pub fn lp_opt(&self) -> f64 {
        self.objective
    }
}

/// Builds the natural LP for `variant` over `inst`.
pub fn natural_model(inst: &Instance, variant: Problem) -> Result<LpModel> {
    let n = inst.n_facilities();
    let m = inst.n_clients();
    let u = inst.u();
    let count_fcost = variant != Problem::Ckm;
    let mut lp = LpModel::new();
    for i in 0..n {
        lp.add_var(0.0, 1.0, if count_fcost { inst.fcost(i) } else { 0.0 });
    }
    for i in 0..n {
        for j in 0..m {
            lp.add_var(0.0, 1.0, inst.c(i, j));
        }
    }
    let xv = |i: usize, j: usize| n + i * m + j;
    for j in 0..m {
        lp.add_row((0..n).map(|i| (xv(i, j), 1.0)).collect(), Sense::Eq, 1.0);
    }
    for i in 0..n {
        let mut row: Vec<(usize, f64)> = (0..m).map(|j| (xv(i, j), 1.0)).collect();
        row.push((i, -u));
        lp.add_row(row, Sense::Le, 0.0);
    }
    for i in 0..n {
        for j in 0..m {
            lp.add_row(vec![(xv(i, j), 1.0), (i, -1.0)], Sense::Le, 0.0);
        }
    }
    match variant {
        Problem::Ckm => {
            let b = inst
                .budget()
                .ok_or_else(|| Error::InvalidInstance("knapsack median needs a budget".into()))?;
            lp.add_row((0..n).map(|i| (i, inst.fcost(i))).collect(), Sense::Le, b);
        }
        Problem::Ckflp => {
            let k = inst
                .k()
                .ok_or_else(|| Error::InvalidInstance("k-facility location needs k".into()))?;
            lp.add_row((0..n).map(|i| (i, 1.0)).collect(), Sense::Le, k as f64);
        }
        Problem::Cflp => {}
    }
    Ok(lp)
}

/// Solves the natural relaxation to an optimal extreme point.
pub fn solve_natural_lp(inst: &Instance, variant: Problem) -> Result<FractionalSolution> {
    let n = inst.n_facilities();
    let m = inst.n_clients();
    if (n as u64).saturating_mul(inst.capacity()) < m as u64 {
        return Err(Error::Infeasible("total capacity is below the number of clients".into()));
    }
    let lp = natural_model(inst, variant)?;
    let sol = solve_extreme(&lp)?;
    let y = sol.values[..n].to_vec();
    let x = sol.values[n..].to_vec();
    let connection_cost = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| inst.c(i, j) * x[i * m + j])
        .sum();
    let facility_cost = (0..n).map(|i| inst.fcost(i) * y[i]).sum();
    Ok(FractionalSolution {
        n_facilities: n,
        n_clients: m,
        x,
        y,
        objective: sol.objective,
        connection_cost,
        facility_cost,
    })
}
