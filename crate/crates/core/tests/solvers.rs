use capround::oracle::rational::{active_rank, rational_lp_solve, to_f64};
use capround::solvers::lp::{set_verify_extreme_points, solve_extreme, LpModel, Sense};
use capround::solvers::FlowNetwork;
use capround::Error;
use proptest::prelude::*;

fn arb_lp() -> impl Strategy<Value = LpModel> {
    (1usize..=8, 1usize..=8).prop_flat_map(|(n, m)| {
        let vars = prop::collection::vec((any::<bool>(), -5i32..=5), n);
        let rows = prop::collection::vec(
            (prop::collection::vec(-4i32..=4, n), 0u8..3, -6i32..=10),
            m,
        );
        (vars, rows).prop_map(move |(vars, rows)| {
            let mut lp = LpModel::new();
            for (boxed, c) in vars {
                let ub = if boxed { 1.0 } else { f64::INFINITY };
                lp.add_var(0.0, ub, c as f64);
            }
            for (coefs, s, rhs) in rows {
                let sense = [Sense::Le, Sense::Ge, Sense::Eq][s as usize];
                let coeffs = coefs
                    .into_iter()
                    .enumerate()
                    .filter(|(_, a)| *a != 0)
                    .map(|(j, a)| (j, a as f64 / 2.0))
                    .collect();
                lp.add_row(coeffs, sense, rhs as f64 / 4.0);
            }
            lp
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn float_simplex_matches_rational(lp in arb_lp()) {
        set_verify_extreme_points(true);
        let exact = rational_lp_solve(&lp);
        let float = solve_extreme(&lp);
        match (exact, float) {
            (Ok(e), Ok(f)) => {
                let eo = to_f64(&e.objective);
                prop_assert!((eo - f.objective).abs() <= 1e-7 * eo.abs().max(1.0),
                    "exact {} float {}", eo, f.objective);
                prop_assert_eq!(active_rank(&lp, &f.values, 1e-9), lp.num_vars());
            }
            (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {}
            (Err(Error::Unbounded), Err(Error::Unbounded)) => {}
            (e, f) => prop_assert!(false, "mismatch: exact {:?} float {:?}", e.map(|s| s.objective), f.map(|s| s.objective)),
        }
    }

    #[test]
    fn flow_matches_brute_force(costs in prop::collection::vec(0u8..20, 6), caps in prop::collection::vec(0i64..=3, 2)) {
        // Two facilities, three unit clients; brute force over 2^3 assignments.
        let c = |i: usize, j: usize| costs[i * 3 + j] as f64;
        let mut best: Option<f64> = None;
        for pattern in 0..8u32 {
            let load1 = pattern.count_ones() as i64;
            if load1 > caps[1] || 3 - load1 > caps[0] {
                continue;
            }
            let total: f64 = (0..3).map(|j| c((pattern >> j & 1) as usize, j)).sum();
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
        let mut g = FlowNetwork::new(7);
        for (i, &cap) in caps.iter().enumerate() {
            g.add_edge(5, i, cap, 0.0);
        }
        for i in 0..2 {
            for j in 0..3 {
                g.add_edge(i, 2 + j, 1, c(i, j));
            }
        }
        for j in 0..3 {
            g.add_edge(2 + j, 6, 1, 0.0);
        }
        match (best, g.min_cost_flow(5, 6, 3)) {
            (Some(b), Ok(sol)) => prop_assert!((b - sol.cost).abs() < 1e-9),
            (None, Err(Error::Infeasible(_))) => {}
            (b, s) => prop_assert!(false, "brute {:?} flow {:?}", b, s.map(|s| s.cost)),
        }
    }
}
