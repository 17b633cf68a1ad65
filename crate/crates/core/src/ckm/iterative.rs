//! Iterative rounding of LP₂ to a pseudo-integral point (at most two fractional openings).

use serde::Serialize;

use crate::ckm::lp2::{Lp2, RowKind, SideRow};
use crate::report::{Check, Checks};
use crate::solvers::lp::{solve_extreme, LpModel, Sense};
use crate::{Result, LP_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub live_vars: usize,
    pub objective: f64,
    pub fixed_zero: usize,
    pub fixed_one: usize,
    pub retired: usize,
    pub fractional: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoIntegral {
    /// Per-facility opening after the loop.
    pub w: Vec<f64>,
    /// Facilities fixed to one.
    pub opened: Vec<usize>,
    /// Facilities still fractional, by id.
    pub fractional: Vec<usize>,
    pub cost: f64,
    pub iterations: Vec<IterationLog>,
}

#[derive(Clone, Copy, PartialEq)]
enum Fix {
    Live,
    Zero,
    One,
}

/// Runs the loop: solve to an extreme point, drop zeros, fix ones, retire tight cluster rows
/// from their groups; stop when nothing became integral or no variable is left.
pub fn iterative_round(lp2: &Lp2, n_facilities: usize) -> Result<PseudoIntegral> {
    let nv = lp2.num_vars();
    let mut fix = vec![Fix::Live; nv];
    let mut value = vec![0.0; nv];
    let mut retired = vec![false; lp2.rows.len()];
    let mut iterations = Vec::new();

    loop {
        let live: Vec<usize> = (0..nv).filter(|&v| fix[v] == Fix::Live).collect();
        if live.is_empty() {
            break;
        }
        let mut col = vec![usize::MAX; nv];
        for (c, &v) in live.iter().enumerate() {
            col[v] = c;
        }
        let ones_in = |vars: &[usize]| vars.iter().filter(|&&v| fix[v] == Fix::One).count() as f64;
        let live_terms = |vars: &[usize]| -> Vec<(usize, f64)> {
            vars.iter().filter(|&&v| fix[v] == Fix::Live).map(|&v| (col[v], 1.0)).collect()
        };

        let mut lp = LpModel::new();
        for &v in &live {
            lp.add_var(0.0, 1.0, lp2.obj[v]);
        }
        let mut row_index = vec![None; lp2.rows.len()];
        for (r, row) in lp2.rows.iter().enumerate() {
            let terms = live_terms(&row.vars);
            if terms.is_empty() {
                continue;
            }
            let rhs = row.rhs - ones_in(&row.vars);
            let sense = if retired[r] {
                Sense::Eq
            } else {
                match row.kind {
                    RowKind::SparseCap => Sense::Le,
                    RowKind::DenseFloor => Sense::Ge,
                }
            };
            row_index[r] = Some(lp.add_row(terms, sense, rhs));
        }
        for grp in &lp2.groups {
            let mut rhs = grp.rhs;
            let mut terms = Vec::new();
            for &r in &grp.rows {
                if retired[r] {
                    rhs -= lp2.rows[r].rhs;
                } else {
                    rhs -= ones_in(&lp2.rows[r].vars);
                    terms.extend(live_terms(&lp2.rows[r].vars));
                }
            }
            if rhs > LP_TOL {
                lp.add_row(terms, Sense::Ge, rhs);
            }
        }
        match lp2.side {
            SideRow::Budget(b) => {
                let spent: f64 = (0..nv).filter(|&v| fix[v] == Fix::One).map(|v| lp2.fcost[v]).sum();
                lp.add_row(live.iter().map(|&v| (col[v], lp2.fcost[v])).collect(), Sense::Le, b - spent);
            }
            SideRow::Cardinality(k) => {
                let used = fix.iter().filter(|&&f| f == Fix::One).count() as f64;
                lp.add_row(live.iter().map(|&v| (col[v], 1.0)).collect(), Sense::Le, k as f64 - used);
            }
        }

        let sol = solve_extreme(&lp)?;
        for (c, &v) in live.iter().enumerate() {
            value[v] = sol.values[c];
        }
        let mut zeros = 0;
        let mut ones = 0;
        for &v in &live {
            if value[v] == 0.0 {
                fix[v] = Fix::Zero;
                zeros += 1;
            } else if value[v] == 1.0 {
                fix[v] = Fix::One;
                ones += 1;
            }
        }
        let mut newly_retired = 0;
        for (r, row) in lp2.rows.iter().enumerate() {
            if retired[r] || row.group.is_none() {
                continue;
            }
            if let Some(ri) = row_index[r] {
                if sol.tight[ri] {
                    retired[r] = true;
                    newly_retired += 1;
                }
            }
        }
        let objective = lp2.offset
            + (0..nv)
                .map(|v| lp2.obj[v] * if fix[v] == Fix::Zero { 0.0 } else { value[v] })
                .sum::<f64>();
        iterations.push(IterationLog {
            live_vars: live.len(),
            objective,
            fixed_zero: zeros,
            fixed_one: ones,
            retired: newly_retired,
            fractional: live.len() - zeros - ones,
        });
        if zeros + ones == 0 {
            break;
        }
    }

    let mut w = vec![0.0; n_facilities];
    let mut opened = Vec::new();
    let mut fractional = Vec::new();
    for v in 0..nv {
        let i = lp2.facs[v];
        match fix[v] {
            Fix::Zero => {}
            Fix::One => {
                w[i] = 1.0;
                opened.push(i);
            }
            Fix::Live => {
                w[i] = value[v];
                fractional.push(i);
            }
        }
    }
    opened.sort_unstable();
    fractional.sort_unstable();
    Ok(PseudoIntegral {
        cost: lp2.cost(&w),
        w,
        opened,
        fractional,
        iterations,
    })
}

impl PseudoIntegral {
    pub fn checks(&self, lp2: &Lp2, witness_cost: f64) -> Checks {
        let mut out = Checks::default();
        out.push(Check::le("round.fractional_count", self.fractional.len() as f64, 2.0, true));
        if self.fractional.len() == 2 {
            let s: f64 = self.fractional.iter().map(|&i| self.w[i]).sum();
            out.push(Check::le("round.pair_sum", (s - 1.0).abs(), 1e-7, false).with_detail(format!("sum {s}")));
        }
        if let SideRow::Budget(b) = lp2.side {
            let spent: f64 = lp2.facs.iter().zip(&lp2.fcost).map(|(&i, f)| f * self.w[i]).sum();
            out.push(Check::le("round.budget", spent, b, true));
        }
        if let SideRow::Cardinality(k) = lp2.side {
            let used: f64 = lp2.facs.iter().map(|&i| self.w[i]).sum();
            out.push(Check::le("round.cardinality", used, k as f64, true));
        }
        out.push(Check::le("round.cost_vs_witness", self.cost, witness_cost, true));
        out.push(Check::worst(
            "round.cost_monotone",
            true,
            self.iterations
                .windows(2)
                .enumerate()
                .map(|(t, p)| (p[1].objective, p[0].objective, format!("iteration {}", t + 1))),
        ));
        let v = lp2.violations(&self.w, 1e-7);
        out.push(Check::holds("round.feasible", v.is_empty(), true, v.join("; ")));
        out
    }
}
