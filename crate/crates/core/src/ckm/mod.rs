//! Capacitated knapsack median: cluster-level LP, iterative rounding, routing and assignment,
//! wrapped in a loop over guesses of the most expensive open facility.

pub mod assign;
pub mod iterative;
pub mod lp2;
pub mod natural;
pub mod open;
pub mod routing;

use serde::Serialize;

use crate::clustering::{build_clusters, ClusterSet};
use crate::hierarchy::{build_hierarchy, Hierarchy, ResCase};
use crate::instance::{Instance, Problem};
use crate::report::{Check, Checks, GuessRecord, Manifest, MetaClusterRecord};
use crate::{alpha, capacity_factor, l_from_eps, Error, Result, BOUND_TOL};

pub use assign::{Assignment, IntegralAssignment};
pub use iterative::PseudoIntegral;
pub use lp2::{Lp2, SideRow};
pub use natural::{solve_natural_lp, FractionalSolution};
pub use open::{OpenMode, Opened};
pub use routing::Routed;

/// How client assignments are reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssignMode {
    Fractional,
    Integral,
}

/// Knobs shared by the knapsack-median and k-facility pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub eps: f64,
    pub l: usize,
    pub side: SideRow,
    pub facility_costs_in_objective: bool,
    pub open_mode: OpenMode,
    pub assign: AssignMode,
}

impl PipelineConfig {
    pub fn capacity_factor(&self) -> f64 {
        capacity_factor(self.l)
    }

    /// Threshold on `res(j_d)` for the G¹/G² split: `4/(l-1)`, never above `eps`.
    pub fn res_threshold(&self) -> f64 {
        4.0 / (self.l as f64 - 1.0)
    }
}

/// All intermediate objects of one pipeline run, in the indices of the instance it ran on.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub lp: FractionalSolution,
    pub clusters: ClusterSet,
    pub hierarchy: Hierarchy,
    pub lp2: Lp2,
    pub witness_cost: f64,
    pub rounded: PseudoIntegral,
    pub opened: Opened,
    pub routed: Routed,
    pub assignment: Assignment,
    pub integral: Option<IntegralAssignment>,
    pub checks: Checks,
}

/// Runs stages I-III on `inst` from an already solved natural LP.
pub fn run_pipeline(inst: &Instance, lp: FractionalSolution, cfg: &PipelineConfig) -> Result<PipelineRun> {
    let lp_opt = lp.objective;
    let l = cfg.l;
    let kappa = cfg.capacity_factor();
    let mut checks = Checks::default();

    let clusters = build_clusters(inst, &lp, l);
    checks.extend(clusters.checks(inst, &lp, lp_opt));
    let hierarchy = build_hierarchy(inst, &clusters, cfg.res_threshold());
    checks.extend(hierarchy.checks(inst, &clusters, &lp, lp_opt));

    let lp2 = lp2::build_lp2(inst, &clusters, &hierarchy, cfg.side, cfg.facility_costs_in_objective);
    checks.push(lp2::ball_in_truncated(&clusters, &lp2));
    let w_prime = lp2::witness(inst, &clusters, &lp, &lp2);
    let witness_cost = lp2.cost(&w_prime);
    checks.extend(lp2::witness_checks(&lp2, &w_prime, l, lp_opt));

    let rounded = iterative::iterative_round(&lp2, inst.n_facilities())?;
    checks.extend(rounded.checks(&lp2, witness_cost));

    let opened = open::open_integral(&rounded, cfg.open_mode)?;
    let cost_hat = lp2.cost(&opened.w);
    if cfg.open_mode == OpenMode::Both {
        checks.push(Check::le("open.cost_not_increased", cost_hat, rounded.cost, false));
    }
    let outside = opened
        .open
        .iter()
        .filter(|&&i| lp2.var_of[i].is_none())
        .count();
    checks.push(Check::holds("open.inside_truncated", outside == 0, true, format!("{outside} outside")));

    let routed = routing::route_demands(inst, &clusters, &hierarchy, &opened.open, kappa)?;
    let beta_slack = usize::from(cfg.open_mode == OpenMode::Larger);
    checks.extend(routed.checks(inst, &clusters, &hierarchy, &opened.open, l, beta_slack));

    let assignment = assign::assign_clients(inst, &clusters, &lp, &routed);
    checks.extend(assign::assignment_checks(inst, &assignment, &routed, &opened.open));

    let lf = l as f64;
    let moves: f64 = routed
        .sent
        .iter()
        .enumerate()
        .flat_map(|(k, s)| s.iter().map(move |&(to, a)| (k, to, a)))
        .map(|(k, to, a)| a * inst.cc(clusters.centers[k], clusters.centers[to]))
        .sum();
    checks.push(Check::le("cost.center_moves", moves, lf * (2.0 * lf + 13.0) * lp_opt, false));
    let delivery: f64 = (0..inst.n_facilities())
        .map(|i| routed.g[i] * inst.c(i, clusters.clusters[clusters.cluster_of[i]].center))
        .sum();
    checks.push(Check::le("cost.delivery", delivery, kappa * (2.0 * lf + 13.0) * lp_opt, false));
    checks.push(Check::le("cost.alpha", assignment.cost, alpha(l) * lp_opt, true));

    let integral = match cfg.assign {
        AssignMode::Fractional => None,
        AssignMode::Integral => {
            let ia = assign::integralize_assignment(inst, &opened.open, kappa)?;
            checks.extend(assign::integral_checks(inst, &ia, assignment.cost, kappa));
            Some(ia)
        }
    };

    Ok(PipelineRun {
        lp,
        clusters,
        hierarchy,
        lp2,
        witness_cost,
        rounded,
        opened,
        routed,
        assignment,
        integral,
        checks,
    })
}

/// A rounded solution in the ids of the original instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub problem: Problem,
    pub eps: f64,
    pub l: usize,
    pub lp_opt: f64,
    pub f_max: Option<f64>,
    pub open: Vec<usize>,
    /// Fractional assignment `x[i * m + j]`.
    pub x: Vec<f64>,
    /// Facility per client when an integral assignment was requested.
    pub integral: Option<Vec<usize>>,
    pub connection_cost: f64,
    pub facility_cost: f64,
    /// Objective value: connection cost (knapsack median) or facility plus connection cost.
    pub cost: f64,
    pub loads: Vec<f64>,
    pub max_load_over_u: f64,
    pub integral_max_load: Option<usize>,
    pub frac_after_round: usize,
    pub ok_budget: bool,
    pub ok_capacity: bool,
    pub ok_cost: bool,
    pub checks: Checks,
    pub manifest: Manifest,
}

impl Solution {
    pub fn budget_used(&self, inst: &Instance) -> f64 {
        self.open.iter().map(|&i| inst.fcost(i)).sum()
    }

    /// Integral cost (facility plus the integral assignment) when available.
    pub fn integral_connection_cost(&self, inst: &Instance) -> Option<f64> {
        self.integral
            .as_ref()
            .map(|f| f.iter().enumerate().map(|(j, &i)| inst.c(i, j)).sum())
    }
}

fn case_name(c: Option<ResCase>) -> Option<String> {
    c.map(|c| match c {
        ResCase::Small => "small".to_string(),
        ResCase::Large => "large".to_string(),
    })
}

/// Lifts a pipeline run on a facility subset back to original ids.
pub fn lift(
    inst: &Instance,
    kept: &[usize],
    run: &PipelineRun,
    problem: Problem,
    cfg: &PipelineConfig,
) -> Solution {
    let n = inst.n_facilities();
    let m = inst.n_clients();
    let open: Vec<usize> = run.opened.open.iter().map(|&i| kept[i]).collect();
    let mut x = vec![0.0; n * m];
    let mut loads = vec![0.0; n];
    for (a, &i) in kept.iter().enumerate() {
        x[i * m..(i + 1) * m].copy_from_slice(&run.assignment.x[a * m..(a + 1) * m]);
        loads[i] = run.routed.g[a];
    }
    let integral = run
        .integral
        .as_ref()
        .map(|ia| ia.facility.iter().map(|&a| kept[a]).collect::<Vec<_>>());
    let integral_max_load = run.integral.as_ref().map(|ia| ia.loads.iter().copied().max().unwrap_or(0));
    let facility_cost: f64 = open.iter().map(|&i| inst.fcost(i)).sum();
    let connection_cost = run.assignment.cost;
    let cost = if cfg.facility_costs_in_objective {
        facility_cost + connection_cost
    } else {
        connection_cost
    };
    let max_load_over_u = loads.iter().copied().fold(0.0, f64::max) / inst.u();
    let kappa = cfg.capacity_factor();
    let ok_capacity = max_load_over_u <= kappa + 1e-7
        && integral_max_load.is_none_or(|ml| ml as i64 <= assign::integral_capacity(inst, kappa));
    let cs = &run.clusters;
    let manifest = Manifest {
        problem: problem.as_str().to_string(),
        eps: cfg.eps,
        l: cfg.l,
        n_facilities: n,
        n_clients: m,
        capacity: inst.capacity(),
        budget_or_k: match cfg.side {
            SideRow::Budget(b) => b,
            SideRow::Cardinality(k) => k as f64,
        },
        guesses: Vec::new(),
        f_max: None,
        lp_opt: run.lp.objective,
        centers: cs.centers.clone(),
        dense_centers: cs.clusters.iter().filter(|c| c.is_dense()).map(|c| c.center).collect(),
        meta_clusters: run
            .hierarchy
            .mcs
            .iter()
            .map(|mc| MetaClusterRecord {
                id: mc.id,
                root_center: cs.centers[mc.root],
                members: mc.members.iter().map(|&k| cs.centers[k]).collect(),
                parent: mc.parent,
                gamma: mc.gamma,
                s2: mc.s2,
                beta: mc.beta,
                case: case_name(mc.case),
            })
            .collect(),
        fractional_per_iteration: run.rounded.iterations.iter().map(|it| it.fractional).collect(),
        open: open.clone(),
        cost,
        connection_cost,
        facility_cost,
        max_load_over_u,
        checks: run.checks.0.clone(),
    };
    Solution {
        problem,
        eps: cfg.eps,
        l: cfg.l,
        lp_opt: run.lp.objective,
        f_max: None,
        open,
        x,
        integral,
        connection_cost,
        facility_cost,
        cost,
        loads,
        max_load_over_u,
        integral_max_load,
        frac_after_round: run.rounded.fractional.len(),
        ok_budget: true,
        ok_capacity,
        ok_cost: run.checks.get("cost.alpha").is_none_or(|c| c.ok),
        checks: run.checks.clone(),
        manifest,
    }
}

/// Cheapest fractional opening with total capacity at least `m`; a lower bound on any LP budget.
fn fractional_capacity_cost(fcosts: &[f64], u: f64, m: usize) -> f64 {
    let mut f: Vec<f64> = fcosts.to_vec();
    f.sort_by(f64::total_cmp);
    let mut need = m as f64 / u;
    let mut cost = 0.0;
    for c in f {
        if need <= 0.0 {
            break;
        }
        let take = need.min(1.0);
        cost += c * take;
        need -= take;
    }
    cost
}

/// Solves a knapsack-median instance for slack `eps`.
pub fn solve_ckm(inst: &Instance, eps: f64, assign: AssignMode) -> Result<Solution> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let budget = inst
        .budget()
        .ok_or_else(|| Error::InvalidInstance("knapsack median needs a budget".into()))?;
    let l = l_from_eps(eps);
    let cfg = PipelineConfig {
        eps,
        l,
        side: SideRow::Budget(budget),
        facility_costs_in_objective: false,
        open_mode: OpenMode::Both,
        assign,
    };
    let m = inst.n_clients();
    let mut guesses: Vec<f64> = inst.fcosts().to_vec();
    guesses.sort_by(f64::total_cmp);
    guesses.dedup();

    let mut records = Vec::new();
    let mut best: Option<(Solution, f64)> = None;
    for &g in &guesses {
        let kept: Vec<usize> = (0..inst.n_facilities()).filter(|&i| inst.fcost(i) <= g).collect();
        let kept_costs: Vec<f64> = kept.iter().map(|&i| inst.fcost(i)).collect();
        let mut record = GuessRecord {
            f_max: g,
            facilities: kept.len(),
            status: String::new(),
            connection_cost: None,
        };
        if (kept.len() as u64).saturating_mul(inst.capacity()) < m as u64 {
            record.status = "skipped: capacity".into();
            records.push(record);
            continue;
        }
        if fractional_capacity_cost(&kept_costs, inst.u(), m) > budget + BOUND_TOL * budget.abs().max(1.0) {
            record.status = "skipped: budget".into();
            records.push(record);
            continue;
        }
        let sub = inst.restrict_facilities(&kept);
        let lp = match solve_natural_lp(&sub, Problem::Ckm) {
            Ok(lp) => lp,
            Err(Error::Infeasible(_)) => {
                record.status = "infeasible".into();
                records.push(record);
                continue;
            }
            Err(e) => return Err(e),
        };
        let run = run_pipeline(&sub, lp, &cfg)?;
        let mut sol = lift(inst, &kept, &run, Problem::Ckm, &cfg);
        sol.f_max = Some(g);
        let used = sol.budget_used(inst);
        let ok_budget = used <= budget + g + BOUND_TOL * (budget + g).abs().max(1.0);
        sol.ok_budget = ok_budget;
        sol.checks.push(Check::le("open.budget", used, budget + g, true));
        record.status = "ok".into();
        record.connection_cost = Some(sol.connection_cost);
        records.push(record);
        if best.as_ref().is_none_or(|(b, _)| sol.connection_cost < b.connection_cost) {
            best = Some((sol, g));
        }
    }
    let (mut sol, g) = best.ok_or_else(|| Error::Infeasible("no guess of f_max admits a feasible LP".into()))?;
    sol.manifest.guesses = records;
    sol.manifest.f_max = Some(g);
    sol.manifest.checks = sol.checks.0.clone();
    sol.checks.clone().into_result()?;
    Ok(sol)
}
