//! Capacitated k-facility location: the knapsack-median pipeline with a cardinality row,
//! facility costs in the objective, and only the larger fractional facility opened.

use serde::Serialize;

use crate::cflp::{make_almost_integral, ClusterInstance};
use crate::ckm::{run_pipeline, solve_natural_lp, AssignMode, FractionalSolution, OpenMode, PipelineConfig, SideRow, Solution};
use crate::clustering::{build_clusters, ClusterSet};
use crate::instance::{Instance, Problem, SideConstraint};
use crate::report::{Check, Checks};
use crate::{cost_factor, l_from_eps, Error, Result};

/// The sparse-cluster opening of one cluster: its cheapest ball facility at extent `min(y*(U(j)), 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialOpening {
    pub cluster: usize,
    pub facility: usize,
    pub y: f64,
}

pub fn sparse_partial_openings(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution) -> Vec<PartialOpening> {
    cs.clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_dense())
        .filter_map(|(k, c)| {
            let facility = c
                .ball
                .iter()
                .copied()
                .min_by(|&a, &b| inst.fcost(a).total_cmp(&inst.fcost(b)).then(a.cmp(&b)))?;
            let mass: f64 = c.facilities.iter().map(|&i| sol.y[i]).sum();
            Some(PartialOpening {
                cluster: k,
                facility,
                y: mass.min(1.0),
            })
        })
        .collect()
}

/// Distance from each center to its nearest other center (ties by id); `None` for a lone center.
fn sigma_costs(inst: &Instance, cs: &ClusterSet) -> Vec<Option<f64>> {
    cs.centers
        .iter()
        .map(|&a| {
            cs.centers
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| inst.cc(a, b))
                .min_by(f64::total_cmp)
        })
        .collect()
}

/// One evaluated instance of `(1 - ŷ_i) d_j c(j, σ(j)) ≤ 8 Π_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyCase {
    pub center: usize,
    pub facility: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl PropertyCase {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Evaluates the sparse-cluster inequality for every center with a positively opened facility.
pub fn verify_property_iv(inst: &Instance, cs: &ClusterSet, openings: &[PartialOpening]) -> Vec<PropertyCase> {
    let sigma = sigma_costs(inst, cs);
    openings
        .iter()
        .filter(|o| o.y > 0.0)
        .filter_map(|o| {
            let c = &cs.clusters[o.cluster];
            let sc = sigma[o.cluster]?;
            Some(PropertyCase {
                center: c.center,
                facility: o.facility,
                lhs: (1.0 - o.y) * c.demand * sc,
                rhs: 8.0 * c.pi,
            })
        })
        .collect()
}

fn property_check(name: &str, cases: &[PropertyCase]) -> Check {
    Check::worst(
        name,
        true,
        cases
            .iter()
            .map(|p| (p.lhs, p.rhs, format!("center {} facility {}", p.center, p.facility))),
    )
}

/// Sparse and dense bounds of the cardinality-preserving openings at clustering `cs`.
fn opening_checks(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, lp_opt: f64, tag: &str) -> Checks {
    let mut out = Checks::default();
    let partial = sparse_partial_openings(inst, cs, sol);
    let facility: Vec<(f64, f64, usize)> = partial
        .iter()
        .map(|o| {
            let c = &cs.clusters[o.cluster];
            let before: f64 = c.facilities.iter().map(|&i| inst.fcost(i) * sol.y[i]).sum();
            (inst.fcost(o.facility) * o.y, 2.0 * before, c.center)
        })
        .collect();
    out.push(Check::worst(&format!("ckflp.sparse_facility{tag}"), true, facility));
    out.push(property_check(&format!("ckflp.sparse_sigma{tag}"), &verify_property_iv(inst, cs, &partial)));

    let mut budget = Vec::new();
    let mut count = Vec::new();
    let mut total = 0.0;
    for c in cs.clusters.iter().filter(|c| c.is_dense()) {
        let ci = ClusterInstance::new(inst, c);
        let z: Vec<f64> = ci.facilities.iter().map(|&i| sol.load(i) / ci.u).collect();
        let zp = make_almost_integral(&ci, &z);
        let y_mass: f64 = ci.facilities.iter().map(|&i| sol.y[i]).sum();
        count.push((ClusterInstance::mass(&zp), y_mass, c.center));
        budget.push((ci.objective(&zp), ci.fbar + ci.pi, c.center));
        total += ci.objective(&zp);
    }
    out.push(Check::worst(&format!("ckflp.dense_cardinality{tag}"), true, count));
    out.push(Check::worst(&format!("ckflp.dense_budget{tag}"), true, budget));
    out.push(Check::le(&format!("ckflp.dense_total{tag}"), total, 5.0 * lp_opt, false));
    out
}

/// Solves capacitated k-facility location with at most `k` open facilities.
pub fn solve_ckflp(inst: &Instance, k: usize, eps: f64, assign: AssignMode) -> Result<Solution> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let m = inst.n_clients();
    if (k.min(inst.n_facilities()) as u64).saturating_mul(inst.capacity()) < m as u64 {
        return Err(Error::Infeasible(format!("{k} facilities of capacity {} cannot serve {m} clients", inst.capacity())));
    }
    let inst = inst.with_side(Problem::Ckflp, SideConstraint::Cardinality(k))?;
    let l = l_from_eps(eps);
    let cfg = PipelineConfig {
        eps,
        l,
        side: SideRow::Cardinality(k),
        facility_costs_in_objective: true,
        open_mode: OpenMode::Larger,
        assign,
    };
    let lp = solve_natural_lp(&inst, Problem::Ckflp)?;
    let lp_opt = lp.objective;
    let pair_cs = build_clusters(&inst, &lp, 2);
    let mut extra = opening_checks(&inst, &pair_cs, &lp, lp_opt, "");

    let run = run_pipeline(&inst, lp, &cfg)?;
    extra.extend(opening_checks(&inst, &run.clusters, &run.lp, lp_opt, "@l"));

    let kept: Vec<usize> = (0..inst.n_facilities()).collect();
    let mut sol = crate::ckm::lift(&inst, &kept, &run, Problem::Ckflp, &cfg);
    sol.checks.extend(extra);
    sol.checks.push(Check::le_exact("ckflp.cardinality", sol.open.len() as f64, k as f64, true));
    let envelope = cost_factor(Problem::Ckflp, l, eps);
    sol.checks.push(Check::le("cost.total", sol.cost, envelope * lp_opt, true));
    sol.ok_budget = sol.open.len() <= k;
    sol.ok_cost = sol.checks.get("cost.total").is_none_or(|c| c.ok);
    sol.manifest.checks = sol.checks.0.clone();
    sol.checks.clone().into_result()?;
    Ok(sol)
}
