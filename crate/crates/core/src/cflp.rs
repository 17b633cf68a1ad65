//! Uniform capacitated facility location by rounding the natural LP.
//!
//! Clusters are built with `l = 2`. A sparse cluster opens the cheapest facility of its ball
//! and takes over the whole cluster's assignment. A dense cluster is solved as a one-row
//! cluster instance: the LP loads give a feasible `z`, a greedy pass leaves at most one
//! fractional facility, and that facility is either closed (its load moves to an open
//! neighbour, within `(1+ε)u`) or opened outright.

use serde::Serialize;

use crate::ckm::assign::{integral_checks, integralize_assignment};
use crate::ckm::{solve_natural_lp, AssignMode, FractionalSolution, Solution};
use crate::clustering::{build_clusters, Cluster, ClusterSet};
use crate::instance::{Instance, Problem};
use crate::report::{Check, Checks, Manifest};
use crate::{cost_factor, Error, Result};

/// Cluster count `l` used by this pipeline.
pub const CFLP_L: usize = 2;

const INTEGRAL_TOL: f64 = 1e-9;

/// A sparse cluster's single opened facility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SparseOpening {
    pub cluster: usize,
    pub facility: usize,
    pub demand: f64,
}

pub fn sparse_open_cheapest(inst: &Instance, cs: &ClusterSet) -> Result<Vec<SparseOpening>> {
    cs.clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_dense())
        .map(|(k, c)| {
            let facility = c
                .ball
                .iter()
                .copied()
                .min_by(|&a, &b| inst.fcost(a).total_cmp(&inst.fcost(b)).then(a.cmp(&b)))
                .ok_or_else(|| Error::falsified("cflp.sparse_ball", format!("empty ball at center {}", c.center)))?;
            Ok(SparseOpening {
                cluster: k,
                facility,
                demand: c.demand,
            })
        })
        .collect()
}

/// Per-cluster facility and service bounds for the sparse openings.
pub fn sparse_checks(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, openings: &[SparseOpening]) -> Checks {
    let m = inst.n_clients();
    let mut fac = Vec::new();
    let mut serv = Vec::new();
    let mut load = Vec::new();
    for o in openings {
        let c = &cs.clusters[o.cluster];
        let ball_cost: f64 = c.ball.iter().map(|&i| inst.fcost(i) * sol.y[i]).sum();
        fac.push((inst.fcost(o.facility), 2.0 * ball_cost, c.center));
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for jp in 0..m {
            let mass = cs.mass(sol, jp, o.cluster);
            lhs += inst.c(o.facility, jp) * mass;
            rhs += 8.0 * cs.cbar[jp] * mass;
            rhs += 4.0 * c.facilities.iter().map(|&i| sol.x(i, jp) * inst.c(i, jp)).sum::<f64>();
        }
        serv.push((lhs, rhs, c.center));
        load.push((o.demand, inst.u(), c.center));
    }
    let mut out = Checks::default();
    out.push(Check::worst("cflp.sparse_facility", true, fac));
    out.push(Check::worst("cflp.sparse_service", true, serv));
    out.push(Check::worst("cflp.sparse_load", true, load));
    out
}

/// The one-row LP of a dense cluster: `min Σ (f_i + u c(i,j)) z_i` s.t. `u Σ z_i = d_j`, `0 ≤ z ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterInstance {
    pub center: usize,
    pub facilities: Vec<usize>,
    pub demand: f64,
    pub u: f64,
    /// Facility-cost budget `Σ_{U(j)} f_i y*_i`.
    pub fbar: f64,
    /// Connection-cost budget.
    pub pi: f64,
    pub fcost: Vec<f64>,
    pub dist: Vec<f64>,
}

impl ClusterInstance {
    pub fn new(inst: &Instance, c: &Cluster) -> ClusterInstance {
        ClusterInstance {
            center: c.center,
            facilities: c.facilities.clone(),
            demand: c.demand,
            u: inst.u(),
            fbar: c.fbar,
            pi: c.pi,
            fcost: c.facilities.iter().map(|&i| inst.fcost(i)).collect(),
            dist: c.facilities.iter().map(|&i| inst.c(i, c.center)).collect(),
        }
    }

    pub fn key(&self, a: usize) -> f64 {
        self.fcost[a] + self.u * self.dist[a]
    }

    /// LP objective at `z`.
    pub fn objective(&self, z: &[f64]) -> f64 {
        (0..z.len()).map(|a| self.key(a) * z[a]).sum()
    }

    pub fn mass(z: &[f64]) -> f64 {
        z.iter().sum()
    }

    /// Facility plus service cost for openings `z` and loads `l`.
    pub fn ci_cost(&self, z: &[f64], l: &[f64]) -> f64 {
        (0..z.len()).map(|a| self.fcost[a] * z[a] + self.dist[a] * l[a]).sum()
    }
}

/// `z_i = load_i / u`, the LP loads of the cluster's facilities.
pub fn cluster_lp_feasible(ci: &ClusterInstance, sol: &FractionalSolution) -> Vec<f64> {
    ci.facilities.iter().map(|&i| sol.load(i) / ci.u).collect()
}

fn is_integral(v: f64) -> bool {
    v <= INTEGRAL_TOL || v >= 1.0 - INTEGRAL_TOL
}

/// Repacks the mass of the fractional entries of `z` greedily by key, leaving at most one fractional.
pub fn make_almost_integral(ci: &ClusterInstance, z: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = z
        .iter()
        .map(|&v| if is_integral(v) { v.round() } else { v })
        .collect();
    let mut frac: Vec<usize> = (0..z.len()).filter(|&a| !is_integral(z[a])).collect();
    let mut mass: f64 = frac.iter().map(|&a| z[a]).sum();
    frac.sort_by(|&a, &b| {
        ci.key(a)
            .total_cmp(&ci.key(b))
            .then(ci.facilities[a].cmp(&ci.facilities[b]))
    });
    for a in frac {
        let take = mass.min(1.0);
        out[a] = if take >= 1.0 - INTEGRAL_TOL {
            1.0
        } else if take <= INTEGRAL_TOL {
            0.0
        } else {
            take
        };
        mass = (mass - take).max(0.0);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DenseCase {
    /// The fractional facility was closed and its load moved to an open one.
    Closed,
    /// The fractional facility was opened fully.
    Opened,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseIntegral {
    pub z: Vec<f64>,
    pub l: Vec<f64>,
    pub case: Option<DenseCase>,
}

pub fn make_integral_dense(ci: &ClusterInstance, zp: &[f64], eps: f64) -> Result<DenseIntegral> {
    let u = ci.u;
    let mut z = zp.to_vec();
    let mut l: Vec<f64> = zp.iter().map(|&v| v * u).collect();
    let frac: Vec<usize> = (0..z.len()).filter(|&a| !is_integral(z[a])).collect();
    if frac.len() > 1 {
        return Err(Error::falsified(
            "cflp.almost_integral",
            format!("{} fractional facilities at center {}", frac.len(), ci.center),
        ));
    }
    let Some(&i1) = frac.first() else {
        return Ok(DenseIntegral { z, l, case: None });
    };
    if z[i1] < eps {
        let i2 = (0..z.len())
            .filter(|&a| z[a] >= 1.0 - INTEGRAL_TOL)
            .min_by(|&a, &b| ci.dist[a].total_cmp(&ci.dist[b]).then(ci.facilities[a].cmp(&ci.facilities[b])))
            .ok_or_else(|| {
                Error::falsified(
                    "cflp.dense_mass",
                    format!("no open facility to absorb load at center {}", ci.center),
                )
            })?;
        l[i2] += l[i1];
        l[i1] = 0.0;
        z[i1] = 0.0;
        Ok(DenseIntegral {
            z,
            l,
            case: Some(DenseCase::Closed),
        })
    } else {
        z[i1] = 1.0;
        Ok(DenseIntegral {
            z,
            l,
            case: Some(DenseCase::Opened),
        })
    }
}

/// Everything computed for one dense cluster.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseRun {
    pub cluster: usize,
    pub ci: ClusterInstance,
    pub z: Vec<f64>,
    pub z_almost: Vec<f64>,
    pub result: DenseIntegral,
}

fn dense_run(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, k: usize, eps: f64) -> Result<DenseRun> {
    let ci = ClusterInstance::new(inst, &cs.clusters[k]);
    let z = cluster_lp_feasible(&ci, sol);
    let z_almost = make_almost_integral(&ci, &z);
    if ClusterInstance::mass(&z_almost) < 1.0 - 1e-7 {
        return Err(Error::falsified(
            "cflp.dense_mass",
            format!("opening mass {} < 1 at center {}", ClusterInstance::mass(&z_almost), ci.center),
        ));
    }
    let result = make_integral_dense(&ci, &z_almost, eps)?;
    Ok(DenseRun {
        cluster: k,
        ci,
        z,
        z_almost,
        result,
    })
}

/// Per-cluster inequalities of the dense step, each aggregated to its tightest case.
pub fn dense_checks(sol: &FractionalSolution, runs: &[DenseRun], eps: f64) -> Checks {
    let mut mass = Vec::new();
    let mut budget = Vec::new();
    let mut fractional = Vec::new();
    let mut mass_kept = Vec::new();
    let mut cost_kept = Vec::new();
    let mut load = Vec::new();
    let mut served = Vec::new();
    let mut inflation = Vec::new();
    let mut ci_budget = Vec::new();
    for r in runs {
        let ci = &r.ci;
        let w = ci.center;
        let ymass: f64 = ci.facilities.iter().map(|&i| sol.y[i]).sum();
        mass.push((ClusterInstance::mass(&r.z), ymass, w));
        budget.push((ci.objective(&r.z), ci.fbar + ci.pi, w));
        let nf = r.z_almost.iter().filter(|&&v| !is_integral(v)).count();
        fractional.push((nf as f64, 1.0, w));
        let (m0, m1) = (ClusterInstance::mass(&r.z), ClusterInstance::mass(&r.z_almost));
        mass_kept.push(((m0 - m1).abs(), 1e-9 * m0.max(1.0), w));
        cost_kept.push((ci.objective(&r.z_almost), ci.objective(&r.z), w));
        for a in 0..ci.facilities.len() {
            load.push((r.result.l[a], (1.0 + eps) * r.result.z[a] * ci.u, ci.facilities[a]));
        }
        let total: f64 = r.result.l.iter().sum();
        served.push(((total - ci.demand).abs(), 1e-7 * ci.demand.max(1.0), w));
        let l_almost: Vec<f64> = r.z_almost.iter().map(|&v| v * ci.u).collect();
        let before = ci.ci_cost(&r.z_almost, &l_almost);
        let after = ci.ci_cost(&r.result.z, &r.result.l);
        inflation.push((after, before / eps, w));
        ci_budget.push((after, (ci.fbar + ci.pi) / eps, w));
    }
    let mut out = Checks::default();
    out.push(Check::worst("cflp.ci_mass", true, mass));
    out.push(Check::worst("cflp.ci_budget", true, budget));
    out.push(Check::worst("cflp.almost_integral_count", true, fractional));
    out.push(Check::worst("cflp.almost_integral_mass", true, mass_kept));
    out.push(Check::worst("cflp.almost_integral_cost", true, cost_kept));
    out.push(Check::worst("cflp.dense_load", true, load));
    out.push(Check::worst("cflp.dense_served", true, served));
    out.push(Check::worst("cflp.dense_inflation", true, inflation));
    out.push(Check::worst("cflp.dense_ci_budget", true, ci_budget));
    out
}

/// Solves uniform capacitated facility location with capacity slack `eps ∈ (0, 1/2)`.
pub fn solve_cflp(inst: &Instance, eps: f64, assign: AssignMode) -> Result<Solution> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let n = inst.n_facilities();
    let m = inst.n_clients();
    let u = inst.u();
    let sol = solve_natural_lp(inst, Problem::Cflp)?;
    let lp_opt = sol.objective;
    let cs = build_clusters(inst, &sol, CFLP_L);
    let mut checks = cs.checks(inst, &sol, lp_opt);

    let sparse = sparse_open_cheapest(inst, &cs)?;
    checks.extend(sparse_checks(inst, &cs, &sol, &sparse));
    let dense: Vec<DenseRun> = (0..cs.clusters.len())
        .filter(|&k| cs.clusters[k].is_dense())
        .map(|k| dense_run(inst, &cs, &sol, k, eps))
        .collect::<Result<_>>()?;
    checks.extend(dense_checks(&sol, &dense, eps));

    let mut ybar = vec![0.0; n];
    let mut x = vec![0.0; n * m];
    for o in &sparse {
        ybar[o.facility] = 1.0;
        for jp in 0..m {
            x[o.facility * m + jp] += cs.mass(&sol, jp, o.cluster);
        }
    }
    for r in &dense {
        for (a, &i) in r.ci.facilities.iter().enumerate() {
            ybar[i] = r.result.z[a];
            let share = r.result.l[a] / r.ci.demand;
            if share > 0.0 {
                for jp in 0..m {
                    x[i * m + jp] += share * cs.mass(&sol, jp, r.cluster);
                }
            }
        }
    }
    let loads: Vec<f64> = (0..n).map(|i| x[i * m..(i + 1) * m].iter().sum()).collect();
    let open: Vec<usize> = (0..n).filter(|&i| ybar[i] > 0.5).collect();
    let facility_cost: f64 = open.iter().map(|&i| inst.fcost(i)).sum();
    let connection_cost: f64 = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| x[i * m + j] * inst.c(i, j))
        .sum();
    let cost = facility_cost + connection_cost;

    checks.push(Check::worst(
        "cflp.load",
        true,
        (0..n).map(|i| (loads[i], (1.0 + eps) * u * ybar[i], i)),
    ));
    checks.push(Check::worst(
        "cflp.client_total",
        true,
        (0..m).map(|j| {
            let s: f64 = (0..n).map(|i| x[i * m + j]).sum();
            ((s - 1.0).abs(), 1e-7, j)
        }),
    ));
    let dense_fy: f64 = dense.iter().map(|r| r.ci.fbar).sum();
    let dense_pi: f64 = dense.iter().map(|r| r.ci.pi).sum();
    let dense_ci: f64 = dense
        .iter()
        .map(|r| r.ci.ci_cost(&r.result.z, &r.result.l))
        .sum();
    checks.push(Check::le("cflp.dense_pi_sum", dense_pi, 5.0 * lp_opt, true));
    checks.push(Check::le("cflp.dense_total", dense_ci, (dense_fy + dense_pi) / eps, true));
    checks.push(Check::le("cflp.dense_total_printed", dense_ci, dense_fy / eps + 5.0 * lp_opt, false));
    checks.push(Check::le("cost.total", cost, cost_factor(Problem::Cflp, CFLP_L, eps) * lp_opt, true));

    let integral = match assign {
        AssignMode::Fractional => None,
        AssignMode::Integral => {
            let ia = integralize_assignment(inst, &open, 1.0 + eps)?;
            checks.extend(integral_checks(inst, &ia, connection_cost, 1.0 + eps));
            Some(ia)
        }
    };

    let max_load_over_u = loads.iter().copied().fold(0.0, f64::max) / u;
    let integral_max_load = integral.as_ref().map(|ia| ia.loads.iter().copied().max().unwrap_or(0));
    let ok_capacity = checks.get("cflp.load").is_none_or(|c| c.ok)
        && checks.get("assign.integral_capacity").is_none_or(|c| c.ok);
    let ok_cost = checks.get("cost.total").is_none_or(|c| c.ok);
    let manifest = Manifest {
        problem: Problem::Cflp.as_str().to_string(),
        eps,
        l: CFLP_L,
        n_facilities: n,
        n_clients: m,
        capacity: inst.capacity(),
        budget_or_k: 0.0,
        lp_opt,
        centers: cs.centers.clone(),
        dense_centers: dense.iter().map(|r| r.ci.center).collect(),
        open: open.clone(),
        cost,
        connection_cost,
        facility_cost,
        max_load_over_u,
        checks: checks.0.clone(),
        ..Manifest::default()
    };
    let out = Solution {
        problem: Problem::Cflp,
        eps,
        l: CFLP_L,
        lp_opt,
        f_max: None,
        open,
        x,
        integral: integral.map(|ia| ia.facility),
        connection_cost,
        facility_cost,
        cost,
        loads,
        max_load_over_u,
        integral_max_load,
        frac_after_round: 0,
        ok_budget: true,
        ok_capacity,
        ok_cost,
        checks,
        manifest,
    };
    out.checks.clone().into_result()?;
    Ok(out)
}
