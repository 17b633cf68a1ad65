//! Brute-force optima by subset enumeration plus min-cost-flow assignment.

use crate::instance::Instance;
use crate::solvers::min_cost_assignment;
use crate::{Error, Result};

/// Largest facility count accepted by the enumeration oracles.
pub const MAX_ORACLE_FACILITIES: usize = 16;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExactSolution {
    /// Objective value: connection cost for the knapsack median, facility plus connection
    /// cost for the facility-location variants.
    pub cost: f64,
    pub facility_cost: f64,
    pub connection_cost: f64,
    pub open: Vec<usize>,
    /// Facility serving each client.
    pub assign: Vec<usize>,
}

enum Side {
    Budget(f64),
    Card(usize),
    Free,
}

fn enumerate(inst: &Instance, side: Side, count_fcost: bool) -> Result<ExactSolution> {
    let n = inst.n_facilities();
    let m = inst.n_clients();
    if n > MAX_ORACLE_FACILITIES {
        return Err(Error::SizeLimit(format!(
            "{n} facilities exceed the oracle limit of {MAX_ORACLE_FACILITIES}"
        )));
    }
    let u = inst.capacity();
    let mut best: Option<ExactSolution> = None;
    for mask in 1u32..(1u32 << n) {
        let open: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if (open.len() as u64).saturating_mul(u) < m as u64 {
            continue;
        }
        let fsum: f64 = open.iter().map(|&i| inst.fcost(i)).sum();
        match side {
            Side::Budget(b) if fsum > b => continue,
            Side::Card(k) if open.len() > k => continue,
            _ => {}
        }
        let fpart = if count_fcost { fsum } else { 0.0 };
        if let Some(b) = &best {
            let lower: f64 = (0..m)
                .map(|j| open.iter().map(|&i| inst.c(i, j)).fold(f64::INFINITY, f64::min))
                .sum();
            if fpart + lower >= b.cost {
                continue;
            }
        }
        let caps: Vec<i64> = open.iter().map(|_| u.min(m as u64) as i64).collect();
        let (conn, local) = min_cost_assignment(&caps, m, |a, j| inst.c(open[a], j))?;
        let cost = fpart + conn;
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(ExactSolution {
                cost,
                facility_cost: fsum,
                connection_cost: conn,
                assign: local.iter().map(|&a| open[a]).collect(),
                open,
            });
        }
    }
    if m == 0 {
        return Ok(ExactSolution {
            cost: 0.0,
            facility_cost: 0.0,
            connection_cost: 0.0,
            open: Vec::new(),
            assign: Vec::new(),
        });
    }
    best.ok_or_else(|| Error::Infeasible("no facility subset satisfies the side constraint and capacity".into()))
}

/// Optimal knapsack-median solution: minimum connection cost with `Σ f ≤ B`.
pub fn exact_ckm(inst: &Instance) -> Result<ExactSolution> {
    let b = inst
        .budget()
        .ok_or_else(|| Error::InvalidInstance("knapsack median needs a budget".into()))?;
    enumerate(inst, Side::Budget(b), false)
}

/// Optimal capacitated facility location (facility plus connection cost).
pub fn exact_cflp(inst: &Instance) -> Result<ExactSolution> {
    enumerate(inst, Side::Free, true)
}

/// Optimal capacitated k-facility location with at most `k` open facilities.
pub fn exact_ckflp(inst: &Instance, k: usize) -> Result<ExactSolution> {
    enumerate(inst, Side::Card(k), true)
}
