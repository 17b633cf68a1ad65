//! Client-level assignment from routed cluster demand, and its integral counterpart.

use serde::Serialize;

use crate::ckm::natural::FractionalSolution;
use crate::ckm::routing::Routed;
use crate::clustering::ClusterSet;
use crate::instance::Instance;
use crate::report::{Check, Checks};
use crate::solvers::min_cost_assignment;
use crate::{Error, Result, BOUND_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub n_clients: usize,
    /// Row-major `x[i * m + j]`.
    pub x: Vec<f64>,
    pub cost: f64,
}

impl Assignment {
    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.n_clients + j]
    }

    pub fn load(&self, i: usize) -> f64 {
        self.x[i * self.n_clients..(i + 1) * self.n_clients].iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralAssignment {
    /// Facility serving each client.
    pub facility: Vec<usize>,
    pub cost: f64,
    pub loads: Vec<usize>,
}

/// `x̄_{ij'} = (g_i / Σ_{U(j'')} g) · θ(j,j'') · x*(j', U(j))`, summed over source clusters `j`.
pub fn assign_clients(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, routed: &Routed) -> Assignment {
    let n = inst.n_facilities();
    let m = inst.n_clients();
    let kn = cs.clusters.len();
    let received: Vec<f64> = (0..kn)
        .map(|k| cs.clusters[k].facilities.iter().map(|&i| routed.g[i]).sum())
        .collect();
    let mut x = vec![0.0; n * m];
    for (k, c) in cs.clusters.iter().enumerate() {
        if c.demand <= 0.0 {
            continue;
        }
        let mass: Vec<f64> = (0..m).map(|jp| cs.mass(sol, jp, k)).collect();
        for &(to, amount) in &routed.sent[k] {
            let theta = amount / c.demand;
            if received[to] <= 0.0 {
                continue;
            }
            for &i in &cs.clusters[to].facilities {
                let share = routed.g[i] / received[to] * theta;
                if share == 0.0 {
                    continue;
                }
                for (jp, &ms) in mass.iter().enumerate() {
                    if ms > 0.0 {
                        x[i * m + jp] += share * ms;
                    }
                }
            }
        }
    }
    let cost = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| inst.c(i, j) * x[i * m + j])
        .sum();
    Assignment { n_clients: m, x, cost }
}

/// `⌈factor · u⌉`, the integral capacity allowed per open facility.
pub fn integral_capacity(inst: &Instance, capacity_factor: f64) -> i64 {
    (capacity_factor * inst.u() - BOUND_TOL).ceil() as i64
}

/// Min-cost flow with unit client supplies and capacity `⌈factor · u⌉` on each open facility.
/// The fractional assignment is feasible for this network, so the result costs no more.
pub fn integralize_assignment(inst: &Instance, open: &[usize], capacity_factor: f64) -> Result<IntegralAssignment> {
    let m = inst.n_clients();
    let caps = vec![integral_capacity(inst, capacity_factor); open.len()];
    let (cost, local) = min_cost_assignment(&caps, m, |a, j| inst.c(open[a], j)).map_err(|e| match e {
        Error::Infeasible(msg) => Error::falsified("assign.integral_flow", msg),
        other => other,
    })?;
    let facility: Vec<usize> = local.iter().map(|&a| open[a]).collect();
    let mut loads = vec![0; inst.n_facilities()];
    for &i in &facility {
        loads[i] += 1;
    }
    Ok(IntegralAssignment { facility, cost, loads })
}

pub fn assignment_checks(inst: &Instance, a: &Assignment, routed: &Routed, open: &[usize]) -> Checks {
    let m = inst.n_clients();
    let n = inst.n_facilities();
    let mut out = Checks::default();
    out.push(Check::worst(
        "assign.client_total",
        true,
        (0..m).map(|j| {
            let s: f64 = (0..n).map(|i| a.x(i, j)).sum();
            ((s - 1.0).abs(), 1e-7, format!("client {j}"))
        }),
    ));
    out.push(Check::worst(
        "assign.facility_load",
        true,
        (0..n).map(|i| ((a.load(i) - routed.g[i]).abs(), 1e-7 * routed.g[i].max(1.0), format!("facility {i}"))),
    ));
    let mut is_open = vec![false; n];
    for &i in open {
        is_open[i] = true;
    }
    let closed_use = (0..n).filter(|&i| !is_open[i]).map(|i| a.load(i)).fold(0.0, f64::max);
    out.push(Check::le("assign.only_open", closed_use, 0.0, true));
    out
}

pub fn integral_checks(inst: &Instance, ia: &IntegralAssignment, fractional_cost: f64, capacity_factor: f64) -> Checks {
    let mut out = Checks::default();
    out.push(Check::le("assign.integral_cost", ia.cost, fractional_cost, true));
    let max_load = ia.loads.iter().copied().max().unwrap_or(0) as f64;
    let bound = integral_capacity(inst, capacity_factor) as f64;
    out.push(Check::le_exact("assign.integral_capacity", max_load, bound, true));
    out
}
