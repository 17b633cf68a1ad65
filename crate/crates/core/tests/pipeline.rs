use std::path::Path;

use capround::cflp::solve_cflp;
use capround::ckflp::solve_ckflp;
use capround::ckm::lp2::{build_lp2, witness, Lp2, RowKind, SideRow};
use capround::ckm::natural::natural_model;
use capround::ckm::{iterative::iterative_round, run_pipeline, solve_ckm, solve_natural_lp, AssignMode, OpenMode, PipelineConfig};
use capround::clustering::build_clusters;
use capround::hierarchy::build_hierarchy;
use capround::instance::{generate, load_instance, Family, GenParams, Instance};
use capround::oracle::rational::to_f64;
use capround::oracle::{exact_cflp, exact_ckflp, exact_ckm, rational_lp_solve};
use capround::solvers::lp::{LpModel, Sense};
use capround::solvers::min_cost_assignment;
use capround::{alpha, capacity_factor, Problem};
use proptest::prelude::*;

fn tiny_a() -> Instance {
    load_instance(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tiny_a.capkm")).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// The first LP of the rounding loop, rebuilt from the public description of LP₂.
fn lp2_model(lp2: &Lp2) -> LpModel {
    let mut lp = LpModel::new();
    for &c in &lp2.obj {
        lp.add_var(0.0, 1.0, c);
    }
    for row in &lp2.rows {
        let sense = match row.kind {
            RowKind::SparseCap => Sense::Le,
            RowKind::DenseFloor => Sense::Ge,
        };
        lp.add_row(row.vars.iter().map(|&v| (v, 1.0)).collect(), sense, row.rhs);
    }
    for g in &lp2.groups {
        let vars = g.rows.iter().flat_map(|&r| lp2.rows[r].vars.iter().map(|&v| (v, 1.0))).collect();
        lp.add_row(vars, Sense::Ge, g.rhs);
    }
    match lp2.side {
        SideRow::Budget(b) => lp.add_row(lp2.fcost.iter().copied().enumerate().collect(), Sense::Le, b),
        SideRow::Cardinality(k) => lp.add_row((0..lp2.num_vars()).map(|v| (v, 1.0)).collect(), Sense::Le, k as f64),
    };
    lp
}

fn ckm_config(eps: f64, l: usize, budget: f64) -> PipelineConfig {
    PipelineConfig {
        eps,
        l,
        side: SideRow::Budget(budget),
        facility_costs_in_objective: false,
        open_mode: OpenMode::Both,
        assign: AssignMode::Fractional,
    }
}

#[test]
fn tiny_a_natural_lp_matches_rational_resolve() {
    let inst = tiny_a();
    let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
    let exact = rational_lp_solve(&natural_model(&inst, Problem::Ckm).unwrap()).unwrap();
    assert!(close(lp.objective, to_f64(&exact.objective)));
}

#[test]
fn tiny_a_average_costs_and_demands() {
    let inst = tiny_a();
    let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
    let cs = build_clusters(&inst, &lp, 5);
    for j in 0..3 {
        let by_hand = lp.x(0, j) * inst.c(0, j) + lp.x(1, j) * inst.c(1, j);
        assert!(close(cs.cbar[j], by_hand));
    }
    let total: f64 = cs.clusters.iter().map(|c| c.demand).sum();
    assert!(close(total, 3.0));
    for c in &cs.clusters {
        assert_eq!(c.is_dense(), c.demand >= 2.0 - 1e-7);
    }
}

#[test]
fn tiny_a_centers_follow_the_greedy_definition() {
    let inst = tiny_a();
    let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
    let l = 5.0;
    let cs = build_clusters(&inst, &lp, 5);

    let radius: Vec<f64> = cs.cbar.iter().map(|c| l * c).collect();
    let mut alive: Vec<usize> = (0..3).collect();
    let mut centers = Vec::new();
    while !alive.is_empty() {
        let j = *alive
            .iter()
            .min_by(|&&a, &&b| radius[a].total_cmp(&radius[b]).then(a.cmp(&b)))
            .unwrap();
        centers.push(j);
        alive.retain(|&jp| jp != j && inst.cc(j, jp) > 2.0 * l * cs.cbar[jp]);
    }
    assert_eq!(cs.centers, centers);
}

#[test]
fn tiny_a_lp2_matches_rational_resolve_and_admits_the_witness() {
    let inst = tiny_a();
    let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
    let cs = build_clusters(&inst, &lp, 5);
    let h = build_hierarchy(&inst, &cs, 1.0);
    let lp2 = build_lp2(&inst, &cs, &h, SideRow::Budget(2.0), false);

    let w = witness(&inst, &cs, &lp, &lp2);
    assert!(lp2.violations(&w, 1e-9).is_empty());

    let exact = rational_lp_solve(&lp2_model(&lp2)).unwrap();
    let rounded = iterative_round(&lp2, inst.n_facilities()).unwrap();
    assert!(close(rounded.iterations[0].objective, lp2.offset + to_f64(&exact.objective)));
}

#[test]
fn tiny_a_assignment_matches_routed_loads() {
    let inst = tiny_a();
    let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
    let run = run_pipeline(&inst, lp, &ckm_config(1.0, 5, 2.0)).unwrap();
    for i in 0..inst.n_facilities() {
        assert!((run.assignment.load(i) - run.routed.g[i]).abs() <= 1e-9);
    }
}

#[test]
fn tiny_a_integral_assignment_matches_enumeration() {
    let inst = tiny_a();
    let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
    let run = run_pipeline(&inst, lp, &ckm_config(1.0, 5, 2.0)).unwrap();
    let open = [0, 1];
    let caps: Vec<i64> = open.iter().map(|&i| (run.routed.g[i] - 1e-9).ceil() as i64).collect();
    let (flow, _) = min_cost_assignment(&caps, 3, |a, j| inst.c(open[a], j)).unwrap();
    let mut best = f64::INFINITY;
    for pattern in 0..8u32 {
        let pick: Vec<usize> = (0..3).map(|j| (pattern >> j & 1) as usize).collect();
        let fits = (0..2).all(|a| pick.iter().filter(|&&p| p == a).count() as i64 <= caps[a]);
        if fits {
            best = best.min((0..3).map(|j| inst.c(open[pick[j]], j)).sum());
        }
    }
    assert_eq!(flow, best);
}

#[test]
fn tiny_a_knapsack_median_sandwich() {
    let inst = tiny_a();
    let sol = solve_ckm(&inst, 1.0, AssignMode::Integral).unwrap();
    let opt = exact_ckm(&inst).unwrap();
    assert_eq!(sol.l, 5);
    assert!(sol.connection_cost >= opt.cost - 1e-9);
    assert!(sol.connection_cost <= 196.0 * sol.lp_opt);
    assert!(sol.budget_used(&inst) <= 2.0 + sol.f_max.unwrap());
}

#[test]
fn tiny_a_facility_location() {
    let inst = tiny_a();
    let sol = solve_cflp(&inst, 0.25, AssignMode::Fractional).unwrap();
    assert!(sol.max_load_over_u <= 1.25 + 1e-9);
    assert!(sol.cost >= exact_cflp(&inst).unwrap().cost - 1e-9);
}

#[test]
fn tiny_a_k_facility_location() {
    let inst = tiny_a();
    let sol = solve_ckflp(&inst, 2, 1.0, AssignMode::Integral).unwrap();
    assert!(sol.open.len() <= 2);
    assert!(sol.max_load_over_u <= 3.0 + 1e-7);
    assert!(sol.cost >= exact_ckflp(&inst, 2).unwrap().cost - 1e-9);
}

#[test]
fn alpha_at_five_and_nine() {
    assert_eq!(alpha(5), 196.0);
    assert_eq!(alpha(9), 376.5);
}

fn arb_instance(problem: Problem) -> impl Strategy<Value = Instance> {
    (2usize..=10, 3usize..=20, 0u64..3, any::<u64>(), any::<bool>()).prop_map(move |(n, m, extra, seed, matrix)| {
        let mut p = GenParams::new(problem, n, m, m.div_ceil(n) as u64 + extra, seed);
        if matrix {
            p.family = Family::UniformMatrix;
        }
        generate(&p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clustering_geometry(inst in arb_instance(Problem::Ckm), l in 2usize..=9) {
        let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
        let cs = build_clusters(&inst, &lp, l);
        let lf = l as f64;
        let slack = |x: f64| 1e-9 * x.abs().max(1.0);
        for &a in &cs.centers {
            for &b in cs.centers.iter().filter(|&&b| b > a) {
                let need = 2.0 * lf * cs.cbar[a].max(cs.cbar[b]);
                prop_assert!(inst.cc(a, b) + slack(need) > need);
            }
        }
        for c in &cs.clusters {
            for &i in &c.facilities {
                for &jp in cs.centers.iter().filter(|&&jp| jp != c.center) {
                    prop_assert!(inst.cc(c.center, jp) <= 2.0 * inst.c(i, jp) + slack(inst.c(i, jp)));
                }
                for jp in 0..inst.n_clients() {
                    let rhs = inst.c(i, jp) + 2.0 * lf * cs.cbar[jp];
                    prop_assert!(inst.c(i, c.center) <= rhs + slack(rhs));
                }
            }
        }
        for &j in &cs.centers {
            for jp in (0..inst.n_clients()).filter(|&jp| cs.ctr[jp] != jp) {
                if inst.cc(j, jp) <= lf * cs.cbar[j] {
                    prop_assert!(cs.cbar[j] <= 2.0 * cs.cbar[jp] + slack(cs.cbar[jp]));
                }
            }
        }
        let total: f64 = cs.clusters.iter().map(|c| c.demand).sum();
        prop_assert!((total - inst.n_clients() as f64).abs() <= 1e-6);
    }

    #[test]
    fn binarized_parent_within_twice_nearest(inst in arb_instance(Problem::Ckm), l in 2usize..=9) {
        let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
        let cs = build_clusters(&inst, &lp, l);
        let h = build_hierarchy(&inst, &cs, 4.0 / (l as f64 - 1.0));
        let f = &h.forest;
        for k in 0..f.len() {
            prop_assert!(f.children[k].len() <= 2);
            if let (Some(p), Some(e)) = (f.sigma[k], f.eta[k]) {
                let (j, jp, je) = (cs.clusters[k].center, cs.clusters[p].center, cs.clusters[e].center);
                let bound = 2.0 * inst.cc(j, je);
                prop_assert!(inst.cc(j, jp) <= bound + 1e-9 * bound.max(1.0));
            }
        }
    }

    #[test]
    fn rounding_is_pseudo_integral_and_within_capacity(inst in arb_instance(Problem::Ckm), eps in prop::sample::select(vec![1.0, 0.5, 0.25])) {
        let l = capround::l_from_eps(eps);
        let lp = solve_natural_lp(&inst, Problem::Ckm).unwrap();
        let run = run_pipeline(&inst, lp, &ckm_config(eps, l, inst.budget().unwrap())).unwrap();
        let frac: Vec<f64> = run.rounded.w.iter().copied().filter(|&v| v > 1e-7 && v < 1.0 - 1e-7).collect();
        prop_assert!(frac.len() <= 2);
        if frac.len() == 2 {
            prop_assert!((frac[0] + frac[1] - 1.0).abs() <= 1e-7);
        }
        let worst = run.routed.g.iter().fold(0.0f64, |a, &b| a.max(b)) / inst.u();
        prop_assert!(worst <= capacity_factor(l) + 1e-7);
        let used: f64 = run.opened.open.iter().map(|&i| inst.fcost(i)).sum();
        let f_max = inst.fcosts().iter().copied().fold(0.0, f64::max);
        prop_assert!(used <= inst.budget().unwrap() + f_max);
    }

    #[test]
    fn solving_twice_is_identical(inst in arb_instance(Problem::Ckm)) {
        let a = solve_ckm(&inst, 0.5, AssignMode::Integral).unwrap();
        let b = solve_ckm(&inst, 0.5, AssignMode::Integral).unwrap();
        prop_assert_eq!(serde_json::to_string(&a.manifest).unwrap(), serde_json::to_string(&b.manifest).unwrap());
        prop_assert_eq!(a.integral, b.integral);
        prop_assert_eq!(a.open, b.open);
    }

    #[test]
    fn facility_location_respects_slack(inst in arb_instance(Problem::Cflp), eps in 0.05f64..0.49) {
        let sol = solve_cflp(&inst, eps, AssignMode::Integral).unwrap();
        prop_assert!(sol.max_load_over_u <= 1.0 + eps + 1e-9);
        let cap = ((1.0 + eps) * inst.u() - 1e-9).ceil() as usize;
        prop_assert!(sol.integral_max_load.unwrap() <= cap);
    }
}
