//! Acceptance suite. Runs as a plain binary (no libtest harness) so that every criterion
//! prints exactly one `PASS`/`FAIL` line; the process exits non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use capround::ckm::lp2::{build_lp2, witness};
use capround::ckm::{iterative::iterative_round, solve_ckm, solve_natural_lp, AssignMode, FractionalSolution, SideRow, Solution};
use capround::cflp::{make_almost_integral, make_integral_dense, solve_cflp, ClusterInstance};
use capround::ckflp::solve_ckflp;
use capround::clustering::{build_clusters, ClusterSet};
use capround::hierarchy::build_hierarchy;
use capround::instance::{generate, Family, GenParams, Instance, SideConstraint};
use capround::oracle::{active_rank, exact_ckm, rational_lp_solve};
use capround::oracle::rational::to_f64;
use capround::solvers::lp::{set_verify_extreme_points, solve_extreme, LpModel, Sense};
use capround::solvers::min_cost_assignment;
use capround::{alpha, capacity_factor, l_from_eps, Error, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Additive slack on the capacity ratio.
const CAPACITY_TOL: f64 = 1e-7;
/// Pair-sum slack for the two fractional openings.
const PAIR_TOL: f64 = 1e-7;
/// Fractionality threshold: a value is integral within this distance of 0 or 1.
const INTEGRAL_TOL: f64 = 1e-7;
/// Relative slack for cost and per-cluster inequalities (float accumulation only).
const REL_TOL: f64 = 1e-9;
/// Relative agreement between the float simplex and the rational re-solve.
const LP_REL_TOL: f64 = 1e-7;
/// Row-activity tolerance when counting active constraints for the rank test.
const RANK_TOL: f64 = 1e-9;
/// Wall-clock limit for the knapsack-median suite.
const SUITE_LIMIT: Duration = Duration::from_secs(300);

const CKM_INSTANCES: u64 = 200;
const CKM_EPS: [f64; 2] = [1.0, 0.5];
const LP2_INSTANCES: u64 = 500;
const CFLP_INSTANCES: u64 = 200;
const CFLP_EPS: [f64; 3] = [0.1, 0.25, 0.45];
const CKFLP_INSTANCES: u64 = 200;
const RANDOM_LPS: usize = 1000;
const FLOW_CASES: usize = 500;

fn le_rel(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs().max(1.0)
}

fn is_fractional(v: f64) -> bool {
    v > INTEGRAL_TOL && v < 1.0 - INTEGRAL_TOL
}

/// Sizes and family for suite member `s`: `|F| ∈ [2, 12]`, `|C| ∈ [3, 24]`.
fn params(problem: Problem, s: u64, base_seed: u64) -> GenParams {
    let n = 2 + (s % 11) as usize;
    let m = 3 + ((s * 7) % 22) as usize;
    let u = m.div_ceil(n) as u64 + s % 3;
    let mut p = GenParams::new(problem, n, m, u, base_seed + s);
    if s % 2 == 1 {
        p.family = Family::UniformMatrix;
    }
    p
}

fn instance(problem: Problem, s: u64, base_seed: u64) -> Instance {
    generate(&params(problem, s, base_seed)).expect("generator")
}

fn loads(inst: &Instance, x: &[f64]) -> Vec<f64> {
    let m = inst.n_clients();
    (0..inst.n_facilities()).map(|i| x[i * m..(i + 1) * m].iter().sum()).collect()
}

fn connection_cost(inst: &Instance, x: &[f64]) -> f64 {
    let m = inst.n_clients();
    let mut total = 0.0;
    for i in 0..inst.n_facilities() {
        for j in 0..m {
            total += x[i * m + j] * inst.c(i, j);
        }
    }
    total
}

fn integral_max_load(inst: &Instance, sol: &Solution) -> Option<usize> {
    let f = sol.integral.as_ref()?;
    let mut count = vec![0usize; inst.n_facilities()];
    for &i in f {
        count[i] += 1;
    }
    count.into_iter().max()
}

/// `Π_j = Σ_{j'} Σ_{i∈U(j)} x*_{ij'} (c(i,j') + 2l C̄_{j'})` from the LP solution alone.
fn pi_of(inst: &Instance, sol: &FractionalSolution, facilities: &[usize], l: usize) -> f64 {
    let m = inst.n_clients();
    let cbar: Vec<f64> = (0..m)
        .map(|j| (0..inst.n_facilities()).map(|i| sol.x(i, j) * inst.c(i, j)).sum())
        .collect();
    let mut pi = 0.0;
    for &i in facilities {
        for (j, cb) in cbar.iter().enumerate() {
            pi += sol.x(i, j) * (inst.c(i, j) + 2.0 * l as f64 * cb);
        }
    }
    pi
}

struct Verdict {
    ok: bool,
    detail: String,
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: usize, title: &str, v: Verdict, elapsed: Duration) {
        if !v.ok {
            self.failed += 1;
        }
        println!(
            "{} criterion {id} ({title}): {} [{:.1}s]",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
}

/// One knapsack-median run with its independently recomputed quantities.
struct CkmRun {
    tag: String,
    l: usize,
    result: Result<(Solution, Instance), Error>,
}

fn ckm_suite() -> (Vec<CkmRun>, Duration) {
    let start = Instant::now();
    let mut runs = Vec::new();
    for s in 0..CKM_INSTANCES {
        let inst = instance(Problem::Ckm, s, 10_000);
        for eps in CKM_EPS {
            let result = solve_ckm(&inst, eps, AssignMode::Integral).map(|sol| (sol, inst.clone()));
            runs.push(CkmRun {
                tag: format!("s{s} eps{eps}"),
                l: l_from_eps(eps),
                result,
            });
        }
    }
    (runs, start.elapsed())
}

fn criterion_1(runs: &[CkmRun], elapsed: Duration) -> Verdict {
    let mut bad = Vec::new();
    for r in runs {
        match &r.result {
            Ok((sol, inst)) => {
                let budget = inst.budget().expect("budget");
                let used: f64 = sol.open.iter().map(|&i| inst.fcost(i)).sum();
                let f_max = sol.f_max.expect("f_max");
                let max_open = sol.open.iter().map(|&i| inst.fcost(i)).fold(0.0, f64::max);
                if used > budget + f_max || max_open > f_max {
                    bad.push(format!("{}: used {used} > {budget} + {f_max}", r.tag));
                }
            }
            Err(e) => bad.push(format!("{}: {e}", r.tag)),
        }
    }
    let in_time = elapsed <= SUITE_LIMIT;
    Verdict {
        ok: bad.is_empty() && in_time,
        detail: format!(
            "budget_used <= B + f_max exactly in {}/{} runs, suite {:.1}s (limit {}s){}",
            runs.len() - bad.len(),
            runs.len(),
            elapsed.as_secs_f64(),
            SUITE_LIMIT.as_secs(),
            first(&bad)
        ),
    }
}

fn capacity_violations(inst: &Instance, sol: &Solution, l: usize) -> Option<String> {
    let kappa = capacity_factor(l);
    let u = inst.u();
    let worst = loads(inst, &sol.x).into_iter().fold(0.0, f64::max) / u;
    if worst > kappa + CAPACITY_TOL {
        return Some(format!("max g/u {worst} > {kappa}"));
    }
    let cap = (kappa * u - 1e-9).ceil() as usize;
    match integral_max_load(inst, sol) {
        Some(load) if load > cap => Some(format!("integral load {load} > {cap}")),
        None => Some("no integral assignment".into()),
        _ => None,
    }
}

fn criterion_2(runs: &[CkmRun]) -> Verdict {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for r in runs {
        if let Ok((sol, inst)) = &r.result {
            worst = worst.max(loads(inst, &sol.x).into_iter().fold(0.0, f64::max) / inst.u());
            if let Some(why) = capacity_violations(inst, sol, r.l) {
                bad.push(format!("{}: {why}", r.tag));
            }
        } else {
            bad.push(format!("{}: no solution", r.tag));
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "load ratio <= 2+4/(l-1)+{CAPACITY_TOL:e} and integral load <= ceil((2+4/(l-1))u) in {}/{} runs, worst ratio {worst:.4}{}",
            runs.len() - bad.len(),
            runs.len(),
            first(&bad)
        ),
    }
}

fn criterion_3(runs: &[CkmRun]) -> Verdict {
    let constants = alpha(5) == 196.0 && alpha(9) == 376.5;
    let mut cost_bad = Vec::new();
    let mut lp_bad = Vec::new();
    let mut below_opt = Vec::new();
    let mut below_infeasible = 0;
    let mut compared = 0;
    for r in runs {
        let Ok((sol, inst)) = &r.result else {
            cost_bad.push(format!("{}: no solution", r.tag));
            continue;
        };
        let cost = connection_cost(inst, &sol.x);
        if !le_rel(cost, alpha(r.l) * sol.lp_opt) {
            cost_bad.push(format!("{}: {cost} > {} * {}", r.tag, alpha(r.l), sol.lp_opt));
        }
        let (Ok(opt), Ok(lp)) = (exact_ckm(inst), solve_natural_lp(inst, Problem::Ckm)) else {
            continue;
        };
        compared += 1;
        if !le_rel(lp.objective, opt.cost) {
            lp_bad.push(format!("{}: LP {} > OPT {}", r.tag, lp.objective, opt.cost));
        }
        if !le_rel(opt.cost, cost) {
            below_opt.push(format!("{}: cost {cost} < OPT {}", r.tag, opt.cost));
            let used: f64 = sol.open.iter().map(|&i| inst.fcost(i)).sum();
            let peak = loads(inst, &sol.x).into_iter().fold(0.0, f64::max);
            if used > inst.budget().expect("budget") || peak > inst.u() {
                below_infeasible += 1;
            }
        }
    }
    Verdict {
        ok: constants && cost_bad.is_empty() && lp_bad.is_empty() && below_opt.is_empty(),
        detail: format!(
            "alpha(5)=196 and alpha(9)=376.5: {constants}; cost <= alpha(l)*LP_opt in {}/{}; OPT >= LP_opt in {}/{compared}; cost >= OPT in {}/{compared} ({below_infeasible} of the runs below OPT exceed B or u){}",
            runs.len() - cost_bad.len(),
            runs.len(),
            compared - lp_bad.len(),
            compared - below_opt.len(),
            first(&[cost_bad, lp_bad, below_opt].concat())
        ),
    }
}

/// One randomized LP₂ instance and the quantities derived from it.
struct Lp2Case {
    tag: String,
    fractional: Vec<f64>,
    feasible: bool,
    witness_matches: bool,
    witness_cost: f64,
    witness_bound: f64,
}

/// Witness from its definition: dense clusters open `load/u` on `T_j`, sparse ones `x*(i, center)`.
fn witness_by_definition(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, truncated: &[Vec<usize>]) -> Vec<f64> {
    let mut w = vec![0.0; inst.n_facilities()];
    for (k, c) in cs.clusters.iter().enumerate() {
        for &i in &truncated[k] {
            w[i] = if c.demand >= inst.u() - 1e-7 {
                sol.load(i) / inst.u()
            } else {
                sol.x(i, c.center)
            };
        }
    }
    w
}

fn lp2_suite() -> Vec<Result<Lp2Case, String>> {
    (0..LP2_INSTANCES)
        .map(|s| {
            let (problem, eps) = match s % 4 {
                0 => (Problem::Ckm, 1.0),
                1 => (Problem::Ckm, 0.5),
                2 => (Problem::Ckflp, 1.0),
                _ => (Problem::Ckflp, 0.25),
            };
            let tag = format!("s{s} {} eps{eps}", problem.as_str());
            let inst = instance(problem, s, 20_000);
            let l = l_from_eps(eps);
            let side = match problem {
                Problem::Ckm => SideRow::Budget(inst.budget().expect("budget")),
                _ => SideRow::Cardinality(inst.k().expect("k")),
            };
            let sol = solve_natural_lp(&inst, problem).map_err(|e| format!("{tag}: {e}"))?;
            let cs = build_clusters(&inst, &sol, l);
            let h = build_hierarchy(&inst, &cs, 4.0 / (l as f64 - 1.0));
            let lp2 = build_lp2(&inst, &cs, &h, side, problem == Problem::Ckflp);
            let w_def = witness_by_definition(&inst, &cs, &sol, &lp2.truncated);
            let w_lib = witness(&inst, &cs, &sol, &lp2);
            let rounded = iterative_round(&lp2, inst.n_facilities()).map_err(|e| format!("{tag}: {e}"))?;
            Ok(Lp2Case {
                fractional: rounded.w.iter().copied().filter(|&v| is_fractional(v)).collect(),
                feasible: lp2.violations(&rounded.w, 1e-7).is_empty(),
                witness_matches: w_def == w_lib,
                witness_cost: lp2.cost(&w_def),
                witness_bound: (2.0 * l as f64 + 13.0) * sol.objective,
                tag,
            })
        })
        .collect()
}

fn criterion_4(cases: &[Result<Lp2Case, String>]) -> Verdict {
    let mut bad = Vec::new();
    let mut pairs = 0;
    for c in cases {
        match c {
            Ok(c) => {
                let n = c.fractional.len();
                if n == 2 {
                    pairs += 1;
                }
                let pair_ok = n < 2 || (c.fractional.iter().sum::<f64>() - 1.0).abs() <= PAIR_TOL;
                if n > 2 || !pair_ok || !c.feasible {
                    bad.push(format!("{}: fractional {:?}, feasible {}", c.tag, c.fractional, c.feasible));
                }
            }
            Err(e) => bad.push(e.clone()),
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "<= 2 fractional and pair sum 1 +- {PAIR_TOL:e} in {}/{} LP2 instances ({pairs} with a pair){}",
            cases.len() - bad.len(),
            cases.len(),
            first(&bad)
        ),
    }
}

fn criterion_5(cases: &[Result<Lp2Case, String>]) -> Verdict {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for c in cases {
        match c {
            Ok(c) => {
                if c.witness_bound > 0.0 {
                    worst = worst.max(c.witness_cost / c.witness_bound);
                }
                if !c.witness_matches || !le_rel(c.witness_cost, c.witness_bound) {
                    bad.push(format!("{}: {} vs {}", c.tag, c.witness_cost, c.witness_bound));
                }
            }
            Err(e) => bad.push(e.clone()),
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "Cost(w') <= (2l+13)*LP_opt in {}/{} runs, worst fraction of bound {worst:.4}{}",
            cases.len() - bad.len(),
            cases.len(),
            first(&bad)
        ),
    }
}

/// Per-cluster dense inequalities, recomputed on the l = 2 clustering of the natural LP.
fn cflp_cluster_violations(inst: &Instance, eps: f64) -> Result<Vec<String>, String> {
    let l = 2;
    let sol = solve_natural_lp(inst, Problem::Cflp).map_err(|e| e.to_string())?;
    let cs = build_clusters(inst, &sol, l);
    let mut bad = Vec::new();
    for c in cs.clusters.iter().filter(|c| c.demand >= inst.u() - 1e-7) {
        let ci = ClusterInstance::new(inst, c);
        let fbar: f64 = c.facilities.iter().map(|&i| inst.fcost(i) * sol.y[i]).sum();
        let pi = pi_of(inst, &sol, &c.facilities, l);
        let z: Vec<f64> = c.facilities.iter().map(|&i| sol.load(i) / inst.u()).collect();
        let key = |a: usize| inst.fcost(c.facilities[a]) + inst.u() * inst.c(c.facilities[a], c.center);
        let obj = |z: &[f64]| (0..z.len()).map(|a| key(a) * z[a]).sum::<f64>();
        let mass = |z: &[f64]| z.iter().sum::<f64>();
        let ci_cost = |z: &[f64], ld: &[f64]| {
            (0..z.len())
                .map(|a| inst.fcost(c.facilities[a]) * z[a] + inst.c(c.facilities[a], c.center) * ld[a])
                .sum::<f64>()
        };
        let tag = format!("center {}", c.center);
        if !le_rel(obj(&z), fbar + pi) {
            bad.push(format!("{tag}: cluster LP cost {} > {}", obj(&z), fbar + pi));
        }
        let zp = make_almost_integral(&ci, &z);
        let nfrac = zp.iter().filter(|&&v| is_fractional(v)).count();
        if nfrac > 1 || (mass(&zp) - mass(&z)).abs() > REL_TOL * mass(&z).max(1.0) || !le_rel(obj(&zp), obj(&z)) {
            bad.push(format!("{tag}: almost-integral step ({nfrac} fractional)"));
        }
        let d = make_integral_dense(&ci, &zp, eps).map_err(|e| e.to_string())?;
        let served: f64 = d.l.iter().sum();
        if (served - c.demand).abs() > 1e-7 * c.demand.max(1.0) {
            bad.push(format!("{tag}: served {served} != {}", c.demand));
        }
        if !le_rel(ci_cost(&d.z, &d.l), (fbar + pi) / eps) {
            bad.push(format!("{tag}: cost {} > {}", ci_cost(&d.z, &d.l), (fbar + pi) / eps));
        }
    }
    Ok(bad)
}

fn criterion_6() -> Verdict {
    let mut bad = Vec::new();
    let mut runs = 0;
    let mut failed_runs = 0;
    let mut worst = 0.0f64;
    for s in 0..CFLP_INSTANCES {
        let inst = instance(Problem::Cflp, s, 30_000);
        for eps in CFLP_EPS {
            runs += 1;
            let before = bad.len();
            let tag = format!("s{s} eps{eps}");
            match solve_cflp(&inst, eps, AssignMode::Fractional) {
                Ok(sol) => {
                    let cap = (1.0 + eps) * inst.u();
                    for (i, g) in loads(&inst, &sol.x).into_iter().enumerate() {
                        let open = sol.open.contains(&i);
                        worst = worst.max(g / inst.u());
                        if (!open && g > 0.0) || !le_rel(g, cap) {
                            bad.push(format!("{tag}: facility {i} load {g} > {cap} (open {open})"));
                        }
                    }
                }
                Err(e) => bad.push(format!("{tag}: {e}")),
            }
            match cflp_cluster_violations(&inst, eps) {
                Ok(v) => bad.extend(v.into_iter().map(|v| format!("{tag}: {v}"))),
                Err(e) => bad.push(format!("{tag}: {e}")),
            }
            failed_runs += usize::from(bad.len() > before);
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "load <= (1+eps)u and per-cluster cost, mass, served and CI-cost bounds hold in {}/{runs} runs ({} instances), worst ratio {worst:.4}{}",
            runs - failed_runs,
            CFLP_INSTANCES,
            first(&bad)
        ),
    }
}

/// `(1 - y'_i) d_j c(j, σ(j)) ≤ 8 Π_j` on every sparse cluster of the clustering at `l`.
fn property_cases(inst: &Instance, sol: &FractionalSolution, l: usize) -> Vec<(f64, f64, usize)> {
    let cs = build_clusters(inst, sol, l);
    let mut out = Vec::new();
    for c in cs.clusters.iter().filter(|c| c.demand < inst.u() - 1e-7) {
        let Some(sigma) = cs
            .centers
            .iter()
            .filter(|&&b| b != c.center)
            .map(|&b| inst.cc(c.center, b))
            .min_by(f64::total_cmp)
        else {
            continue;
        };
        let y: f64 = c.facilities.iter().map(|&i| sol.y[i]).sum::<f64>().min(1.0);
        if y <= 0.0 || c.ball.is_empty() {
            continue;
        }
        let lhs = (1.0 - y) * c.demand * sigma;
        out.push((lhs, 8.0 * pi_of(inst, sol, &c.facilities, l), c.center));
    }
    out
}

fn criterion_7() -> Verdict {
    let mut bad = Vec::new();
    let mut runs = 0;
    let mut cases = 0;
    for s in 0..CKFLP_INSTANCES {
        let inst = instance(Problem::Ckflp, s, 40_000);
        let k = inst.k().expect("k");
        for eps in CKM_EPS {
            runs += 1;
            let l = l_from_eps(eps);
            let tag = format!("s{s} eps{eps} k{k}");
            match solve_ckflp(&inst, k, eps, AssignMode::Integral) {
                Ok(sol) => {
                    if sol.open.len() > k {
                        bad.push(format!("{tag}: {} open", sol.open.len()));
                    }
                    if let Some(why) = capacity_violations(&inst, &sol, l) {
                        bad.push(format!("{tag}: {why}"));
                    }
                }
                Err(e) => bad.push(format!("{tag}: {e}")),
            }
            let side = inst.with_side(Problem::Ckflp, SideConstraint::Cardinality(k)).expect("side");
            match solve_natural_lp(&side, Problem::Ckflp) {
                Ok(lp) => {
                    for l in [2, l] {
                        for (lhs, rhs, center) in property_cases(&side, &lp, l) {
                            cases += 1;
                            if !le_rel(lhs, rhs) {
                                bad.push(format!("{tag}: l={l} center {center}: {lhs} > {rhs}"));
                            }
                        }
                    }
                }
                Err(e) => bad.push(format!("{tag}: {e}")),
            }
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "|open| <= k exactly and capacity as in criterion 2 in {runs} runs; sparse-cluster inequality held in {}/{cases} cases{}",
            cases - bad.len().min(cases),
            first(&bad)
        ),
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpModel {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let mut lp = LpModel::new();
    for _ in 0..n {
        let ub = if rng.gen_bool(0.5) { 1.0 } else { f64::INFINITY };
        lp.add_var(0.0, ub, rng.gen_range(-5i32..=5) as f64);
    }
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n)
            .map(|j| (j, rng.gen_range(-4i32..=4) as f64 / 2.0))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
        lp.add_row(coeffs, sense, rng.gen_range(-6i32..=10) as f64 / 4.0);
    }
    lp
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bad = Vec::new();
    let mut solved = 0;
    set_verify_extreme_points(true);
    for t in 0..RANDOM_LPS {
        let lp = random_lp(&mut rng);
        match (rational_lp_solve(&lp), solve_extreme(&lp)) {
            (Ok(e), Ok(f)) => {
                solved += 1;
                let eo = to_f64(&e.objective);
                if (eo - f.objective).abs() > LP_REL_TOL * eo.abs().max(1.0) {
                    bad.push(format!("lp {t}: exact {eo} float {}", f.objective));
                }
                let rank = active_rank(&lp, &f.values, RANK_TOL);
                if rank != lp.num_vars() {
                    bad.push(format!("lp {t}: active rank {rank} < {}", lp.num_vars()));
                }
            }
            (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) | (Err(Error::Unbounded), Err(Error::Unbounded)) => {}
            (e, f) => bad.push(format!("lp {t}: exact {:?} float {:?}", e.map(|s| to_f64(&s.objective)), f.map(|s| s.objective))),
        }
    }
    set_verify_extreme_points(false);

    let mut flows = 0;
    for t in 0..FLOW_CASES {
        let costs: Vec<f64> = (0..6).map(|_| rng.gen_range(0..20) as f64).collect();
        let caps: Vec<i64> = (0..2).map(|_| rng.gen_range(0..=3)).collect();
        let mut best: Option<f64> = None;
        for pattern in 0..8u32 {
            let mut used = [0i64; 2];
            let mut cost = 0.0;
            for j in 0..3 {
                let i = (pattern >> j & 1) as usize;
                used[i] += 1;
                cost += costs[i * 3 + j];
            }
            if used[0] <= caps[0] && used[1] <= caps[1] {
                best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            }
        }
        let flow = min_cost_assignment(&caps, 3, |i, j| costs[i * 3 + j]).ok().map(|(c, _)| c);
        flows += 1;
        if flow != best {
            bad.push(format!("flow {t}: {flow:?} vs brute force {best:?}"));
        }
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "{RANDOM_LPS} LPs ({solved} optimal) within {LP_REL_TOL:e} of the rational re-solve with full active rank; {flows} flows match 8-pattern enumeration; {} mismatches{}",
            bad.len(),
            first(&bad)
        ),
    }
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_capround"))
        .args(args)
        .env_remove("CAPROUND_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

/// Every artifact of one round, produced under `dir` with fixed file names.
fn artifacts(dir: &std::path::Path) -> Result<Vec<Vec<u8>>, String> {
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let inst = path("inst.capkm");
    let mut out = Vec::new();
    cli(&["gen", "--problem", "ckm", "-n", "8", "-m", "16", "-u", "3", "--seed", "9", "--out", &inst])?;
    out.push(std::fs::read(&inst).map_err(|e| e.to_string())?);
    for (problem, eps, k) in [("ckm", "0.5", None), ("cflp", "0.25", None), ("ckflp", "1", Some("6"))] {
        let manifest = path(&format!("{problem}.json"));
        let csv = path(&format!("{problem}.csv"));
        let mut args = vec!["solve", "--problem", problem, "--eps", eps, "--input", &inst, "--assign", "integral"];
        args.extend(["--manifest", &manifest, "--out", &csv]);
        if let Some(k) = k {
            args.extend(["--k", k]);
        }
        cli(&args)?;
        out.push(std::fs::read(&csv).map_err(|e| e.to_string())?);
        out.push(std::fs::read(&manifest).map_err(|e| e.to_string())?);
    }
    for problem in ["ckm", "cflp", "ckflp"] {
        let eps = if problem == "cflp" { "0.1,0.45" } else { "1,0.5" };
        out.push(cli(&["bench", "--problem", problem, "--eps-list", eps, "--seeds", "3", "--sizes", "5x10,7x14", "--seed", "4"])?);
    }
    Ok(out)
}

fn criterion_9() -> Verdict {
    let (a, b) = (tempfile::tempdir().expect("tempdir"), tempfile::tempdir().expect("tempdir"));
    let mut compared = 0;
    let mut bad = Vec::new();
    match artifacts(a.path()).and_then(|x| artifacts(b.path()).map(|y| (x, y))) {
        Ok((x, y)) => {
            for (p, q) in x.iter().zip(&y) {
                compared += 1;
                if p != q || p.is_empty() {
                    bad.push(format!("artifact {compared} differs or is empty"));
                }
            }
        }
        Err(e) => bad.push(e),
    }
    Verdict {
        ok: bad.is_empty(),
        detail: format!(
            "{}/{compared} instance, CSV and manifest artifacts bit-identical across two runs{}",
            compared - bad.len().min(compared),
            first(&bad)
        ),
    }
}

fn first(bad: &[String]) -> String {
    match bad.first() {
        Some(b) => format!("; first failure: {b} ({} total)", bad.len()),
        None => String::new(),
    }
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    let (runs, elapsed) = ckm_suite();
    report.line(1, "budget", criterion_1(&runs, elapsed), elapsed);
    let t = Instant::now();
    report.line(2, "capacity", criterion_2(&runs), t.elapsed());
    let t = Instant::now();
    report.line(3, "cost factor", criterion_3(&runs), t.elapsed());

    let t = Instant::now();
    let cases = lp2_suite();
    let lp2_time = t.elapsed();
    report.line(4, "pseudo-integrality", criterion_4(&cases), lp2_time);
    report.line(5, "witness cost", criterion_5(&cases), lp2_time);

    let t = Instant::now();
    let v = criterion_6();
    report.line(6, "facility location", v, t.elapsed());
    let t = Instant::now();
    let v = criterion_7();
    report.line(7, "k-facility location", v, t.elapsed());
    let t = Instant::now();
    let v = criterion_8();
    report.line(8, "solver correctness", v, t.elapsed());
    let t = Instant::now();
    let v = criterion_9();
    report.line(9, "determinism", v, t.elapsed());

    println!("{} of 9 criteria passed", 9 - report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
