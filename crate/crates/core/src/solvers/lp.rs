//! Bounded-variable revised simplex returning basic (extreme-point) optima.
//!
//! The basis inverse is kept dense and updated in product form, with a full
//! refactorization every [`REFACTOR_EVERY`] pivots and again before accepting an optimum.
//! Pricing is Dantzig's rule until `5 (m + n)` consecutive degenerate pivots, after which
//! Bland's rule takes over for the rest of the phase.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering};

use crate::{Error, Result};

const REFACTOR_EVERY: usize = 50;
const PIVOT_TOL: f64 = 1e-9;
const SNAP_TOL: f64 = 1e-9;
const TIGHT_TOL: f64 = 1e-7;

static VERIFY_EXTREME: AtomicBool = AtomicBool::new(false);

/// Turns on the rank check of every returned solution (used by the test suites).
pub fn set_verify_extreme_points(on: bool) {
    VERIFY_EXTREME.store(on, Ordering::Relaxed);
}

pub fn verify_extreme_points() -> bool {
    VERIFY_EXTREME.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Minimization LP over bounded variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    pub obj_offset: f64,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, obj: f64) -> usize {
        self.vars.push(Variable { lower, upper, obj });
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Constraint { coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.obj_offset + self.vars.iter().zip(x).map(|(v, xi)| v.obj * xi).sum::<f64>()
    }

    pub fn activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars.len();
        for (j, v) in self.vars.iter().enumerate() {
            if !v.lower.is_finite() || v.upper < v.lower || v.upper.is_nan() || !v.obj.is_finite() {
                return Err(Error::Domain(format!("variable {j} has bounds [{}, {}]", v.lower, v.upper)));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(Error::Domain(format!("row {i} has non-finite rhs")));
            }
            if let Some(&(j, a)) = r.coeffs.iter().find(|&&(j, a)| j >= n || !a.is_finite()) {
                return Err(Error::Domain(format!("row {i} references variable {j} with coefficient {a}")));
            }
        }
        Ok(())
    }

    /// Dump in CPLEX LP text form.
    pub fn to_lp_text(&self) -> String {
        fn terms(out: &mut String, coeffs: &[(usize, f64)]) {
            if coeffs.is_empty() {
                out.push_str(" 0 x0");
            }
            for &(j, a) in coeffs {
                let sign = if a < 0.0 { '-' } else { '+' };
                write!(out, " {sign} {} x{j}", a.abs()).unwrap();
            }
        }
        let mut out = String::from("\\ capround LP dump\nMinimize\n obj:");
        let obj: Vec<(usize, f64)> = self
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.obj != 0.0)
            .map(|(j, v)| (j, v.obj))
            .collect();
        terms(&mut out, &obj);
        if self.obj_offset != 0.0 {
            write!(out, " + {} constant", self.obj_offset).unwrap();
        }
        out.push_str("\nSubject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            write!(out, " c{i}:").unwrap();
            terms(&mut out, &r.coeffs);
            let op = match r.sense {
                Sense::Le => "<=",
                Sense::Ge => ">=",
                Sense::Eq => "=",
            };
            writeln!(out, " {op} {}", r.rhs).unwrap();
        }
        out.push_str("Bounds\n");
        for (j, v) in self.vars.iter().enumerate() {
            if v.upper.is_finite() {
                writeln!(out, " {} <= x{j} <= {}", v.lower, v.upper).unwrap();
            } else {
                writeln!(out, " x{j} >= {}", v.lower).unwrap();
            }
        }
        if self.obj_offset != 0.0 {
            out.push_str(" constant = 1\n");
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: Vec<VarStatus>,
    pub activity: Vec<f64>,
    pub tight: Vec<bool>,
}

impl LpSolution {
    /// Rows of the active constraint system at this point: tight rows (equalities
    /// included) followed by unit rows for variables sitting at a bound.
    pub fn active_rows(&self, model: &LpModel) -> Vec<Vec<f64>> {
        let n = model.num_vars();
        let mut rows = Vec::new();
        for (i, r) in model.rows.iter().enumerate() {
            if self.tight[i] {
                let mut dense = vec![0.0; n];
                for &(j, a) in &r.coeffs {
                    dense[j] += a;
                }
                rows.push(dense);
            }
        }
        for (j, v) in model.vars.iter().enumerate() {
            let x = self.values[j];
            if (x - v.lower).abs() <= SNAP_TOL || (v.upper.is_finite() && (x - v.upper).abs() <= SNAP_TOL) {
                let mut dense = vec![0.0; n];
                dense[j] = 1.0;
                rows.push(dense);
            }
        }
        rows
    }
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn float_rank(rows: &[Vec<f64>], ncols: usize) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == a.len() {
            break;
        }
        let (best, val) = (rank..a.len())
            .map(|r| (r, a[r][col].abs()))
            .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= 1e-9 {
            continue;
        }
        a.swap(rank, best);
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for c in col..ncols {
                    row[c] -= f * pivot_row[c];
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Simplex {
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    head: Vec<usize>,
    binv: Vec<f64>,
    b: Vec<f64>,
    is_art: Vec<bool>,
    bland: bool,
    stalled: usize,
    since_refactor: usize,
    iterations: usize,
    max_iterations: usize,
}

impl Simplex {
    fn build(model: &LpModel) -> Self {
        let m = model.num_rows();
        let n = model.num_vars();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, r) in model.rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        let mut lo: Vec<f64> = model.vars.iter().map(|v| v.lower).collect();
        let mut up: Vec<f64> = model.vars.iter().map(|v| v.upper).collect();
        let mut x = lo.clone();
        let mut state = vec![State::Lower; n];
        let mut is_art = vec![false; n];
        let b: Vec<f64> = model.rows.iter().map(|r| r.rhs).collect();

        let mut residual = b.clone();
        for (j, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                residual[i] -= a * x[j];
            }
        }

        let mut head = vec![0; m];
        let mut binv = vec![0.0; m * m];
        let mut push_col = |cols: &mut Vec<Vec<(usize, f64)>>, entry: (usize, f64), art: bool| {
            cols.push(vec![entry]);
            lo.push(0.0);
            up.push(f64::INFINITY);
            x.push(0.0);
            state.push(State::Lower);
            is_art.push(art);
            cols.len() - 1
        };
        let mut initial = Vec::with_capacity(m);
        for (i, r) in model.rows.iter().enumerate() {
            let res = residual[i];
            let slack_coef = match r.sense {
                Sense::Le => Some(1.0),
                Sense::Ge => Some(-1.0),
                Sense::Eq => None,
            };
            let mut basic = None;
            if let Some(sc) = slack_coef {
                let s = push_col(&mut cols, (i, sc), false);
                if res * sc >= 0.0 {
                    basic = Some((s, sc, res * sc));
                }
            }
            let (col, coef, val) = match basic {
                Some(t) => t,
                None => {
                    let sign = if res < 0.0 { -1.0 } else { 1.0 };
                    let a = push_col(&mut cols, (i, sign), true);
                    (a, sign, res.abs())
                }
            };
            initial.push((col, coef, val));
        }
        for (i, (col, coef, val)) in initial.into_iter().enumerate() {
            x[col] = val;
            state[col] = State::Basic(i);
            head[i] = col;
            binv[i * m + i] = 1.0 / coef;
        }
        let ncols = cols.len();
        Simplex {
            m,
            cols,
            lo,
            up,
            cost: vec![0.0; ncols],
            x,
            state,
            head,
            binv,
            b,
            is_art,
            bland: false,
            stalled: 0,
            since_refactor: 0,
            iterations: 0,
            max_iterations: 20_000 + 50 * (m + ncols),
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (pos, &j) in self.head.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + pos] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (p, val) = (c..m)
                .map(|r| (r, a[r * m + c].abs()))
                .fold((c, -1.0), |acc, t| if t.1 > acc.1 { t } else { acc });
            if val < 1e-12 {
                return Err(Error::Numeric("singular basis during refactorization".into()));
            }
            if p != c {
                for k in 0..m {
                    a.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        // Rows of `inv` follow basis positions because column `pos` of B holds head[pos].
        self.binv = inv;
        let mut rhs = self.b.clone();
        for (j, col) in self.cols.iter().enumerate() {
            if !matches!(self.state[j], State::Basic(_)) && self.x[j] != 0.0 {
                for &(i, v) in col {
                    rhs[i] -= v * self.x[j];
                }
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            self.x[self.head[pos]] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut pi = vec![0.0; m];
        for pos in 0..m {
            let c = self.cost[self.head[pos]];
            if c != 0.0 {
                let row = &self.binv[pos * m..(pos + 1) * m];
                for k in 0..m {
                    pi[k] += c * row[k];
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[f64]) -> f64 {
        self.cost[j] - self.cols[j].iter().map(|&(i, a)| pi[i] * a).sum::<f64>()
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(i, a) in &self.cols[j] {
            for (pos, al) in alpha.iter_mut().enumerate() {
                *al += self.binv[pos * m + i] * a;
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let ar = alpha[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            *v /= ar;
        }
        for (pos, chunk) in before.chunks_mut(m).enumerate() {
            let f = alpha[pos];
            if f != 0.0 {
                for (v, rr) in chunk.iter_mut().zip(row_r.iter()) {
                    *v -= f * rr;
                }
            }
        }
        for (off, chunk) in after.chunks_mut(m).enumerate() {
            let f = alpha[r + 1 + off];
            if f != 0.0 {
                for (v, rr) in chunk.iter_mut().zip(row_r.iter()) {
                    *v -= f * rr;
                }
            }
        }
        self.head[r] = q;
        self.state[q] = State::Basic(r);
        self.since_refactor += 1;
    }

    fn dual_tol(&self) -> f64 {
        1e-9 * self.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()))
    }

    fn choose_entering(&self, pi: &[f64]) -> Option<(usize, f64)> {
        let tol = self.dual_tol();
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols.len() {
            let st = self.state[j];
            if matches!(st, State::Basic(_)) || self.up[j] - self.lo[j] <= 0.0 {
                continue;
            }
            let d = self.reduced_cost(j, pi);
            let eligible = (st == State::Lower && d < -tol) || (st == State::Upper && d > tol);
            if !eligible {
                continue;
            }
            if self.bland {
                return Some((j, d));
            }
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((j, d));
            }
        }
        best
    }

    fn run(&mut self) -> Result<Outcome> {
        let n_total = self.cols.len();
        let mut confirmations = 0;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::Numeric(format!(
                    "simplex exceeded {} iterations",
                    self.max_iterations
                )));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let pi = self.duals();
            let Some((q, _d)) = self.choose_entering(&pi) else {
                // Confirm optimality on a fresh factorization before accepting.
                if self.since_refactor == 0 || confirmations > 3 {
                    return Ok(Outcome::Optimal);
                }
                confirmations += 1;
                self.refactor()?;
                continue;
            };
            let dir = if self.state[q] == State::Lower { 1.0 } else { -1.0 };
            let alpha = self.column(q);

            let mut theta = self.up[q] - self.lo[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut best_piv = 0.0;
            for pos in 0..self.m {
                let a = alpha[pos];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.head[pos];
                let delta = -dir * a;
                let xv = self.x[j];
                let (limit, to_upper) = if delta < 0.0 {
                    (((xv - self.lo[j]) / -delta).max(0.0), false)
                } else if self.up[j].is_finite() {
                    (((self.up[j] - xv) / delta).max(0.0), true)
                } else {
                    continue;
                };
                if limit < theta - 1e-12 {
                    theta = limit;
                    leave = Some((pos, to_upper));
                    best_piv = a.abs();
                } else if limit <= theta + 1e-12 {
                    let better = match leave {
                        None => true,
                        Some((lp, _)) if self.bland => j < self.head[lp],
                        Some(_) => a.abs() > best_piv,
                    };
                    if better {
                        theta = theta.min(limit);
                        leave = Some((pos, to_upper));
                        best_piv = a.abs();
                    }
                }
            }
            if !theta.is_finite() {
                return Ok(Outcome::Unbounded);
            }

            if theta <= 1e-12 {
                self.stalled += 1;
                if self.stalled > 5 * (self.m + n_total) {
                    self.bland = true;
                }
            } else {
                self.stalled = 0;
            }

            self.x[q] += dir * theta;
            for pos in 0..self.m {
                if alpha[pos] != 0.0 {
                    let j = self.head[pos];
                    self.x[j] -= dir * theta * alpha[pos];
                }
            }
            match leave {
                None => {
                    // Bound flip of the entering variable.
                    if self.state[q] == State::Lower {
                        self.state[q] = State::Upper;
                        self.x[q] = self.up[q];
                    } else {
                        self.state[q] = State::Lower;
                        self.x[q] = self.lo[q];
                    }
                }
                Some((pos, to_upper)) => {
                    let j = self.head[pos];
                    if to_upper {
                        self.state[j] = State::Upper;
                        self.x[j] = self.up[j];
                    } else {
                        self.state[j] = State::Lower;
                        self.x[j] = self.lo[j];
                    }
                    self.pivot(pos, q, &alpha);
                }
            }
        }
    }

    /// Pivots basic artificials out of the basis where a non-artificial column can replace them.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for pos in 0..m {
            let j = self.head[pos];
            if !self.is_art[j] {
                continue;
            }
            let row: Vec<f64> = self.binv[pos * m..(pos + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for q in 0..self.cols.len() {
                if self.is_art[q] || matches!(self.state[q], State::Basic(_)) {
                    continue;
                }
                let rho: f64 = self.cols[q].iter().map(|&(i, a)| row[i] * a).sum();
                if rho.abs() > 1e-9 && best.is_none_or(|(_, b)| rho.abs() > b.abs()) {
                    best = Some((q, rho));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.column(q);
                self.state[j] = State::Lower;
                self.x[j] = 0.0;
                self.pivot(pos, q, &alpha);
            }
        }
        self.refactor()
    }
}

/// Solves `model` to an optimal basic feasible solution.
pub fn solve_extreme(model: &LpModel) -> Result<LpSolution> {
    model.validate()?;
    let n = model.num_vars();
    let m = model.num_rows();
    let mut sx = Simplex::build(model);

    if sx.is_art.iter().any(|&a| a) {
        for (j, c) in sx.cost.iter_mut().enumerate() {
            *c = if sx.is_art[j] { 1.0 } else { 0.0 };
        }
        sx.run()?;
        sx.refactor()?;
        let infeas: f64 = (0..sx.cols.len())
            .filter(|&j| sx.is_art[j])
            .map(|j| sx.x[j].abs())
            .sum();
        let scale = model.rows.iter().fold(1.0f64, |a, r| a.max(r.rhs.abs()));
        if infeas > 1e-7 * scale {
            return Err(Error::Infeasible(format!(
                "phase one ended with infeasibility {infeas:.3e}"
            )));
        }
        for j in 0..sx.cols.len() {
            if sx.is_art[j] {
                sx.up[j] = 0.0;
            }
        }
        sx.drive_out_artificials()?;
        sx.bland = false;
        sx.stalled = 0;
    }

    for j in 0..sx.cols.len() {
        sx.cost[j] = if j < n { model.vars[j].obj } else { 0.0 };
    }
    match sx.run()? {
        Outcome::Optimal => {}
        Outcome::Unbounded => return Err(Error::Unbounded),
    }
    sx.refactor()?;

    let mut values = sx.x[..n].to_vec();
    let mut status = Vec::with_capacity(n);
    for (j, v) in model.vars.iter().enumerate() {
        let x = &mut values[j];
        if (*x - v.lower).abs() <= SNAP_TOL {
            *x = v.lower;
        } else if v.upper.is_finite() && (*x - v.upper).abs() <= SNAP_TOL {
            *x = v.upper;
        }
        let bound_slack = 1e-7 * (1.0 + x.abs());
        if *x < v.lower - bound_slack || *x > v.upper + bound_slack {
            return Err(Error::Numeric(format!(
                "variable {j} = {x} escaped its bounds [{}, {}]",
                v.lower, v.upper
            )));
        }
        status.push(match sx.state[j] {
            State::Basic(_) => VarStatus::Basic,
            State::Lower => VarStatus::AtLower,
            State::Upper => VarStatus::AtUpper,
        });
    }
    let activity: Vec<f64> = (0..m).map(|i| model.activity(i, &values)).collect();
    let tight = model
        .rows
        .iter()
        .zip(&activity)
        .map(|(r, a)| r.sense == Sense::Eq || (a - r.rhs).abs() <= TIGHT_TOL)
        .collect();
    let sol = LpSolution {
        objective: model.objective_at(&values),
        values,
        status,
        activity,
        tight,
    };

    if verify_extreme_points() {
        let rank = float_rank(&sol.active_rows(model), n);
        if rank < n {
            return Err(Error::Numeric(format!(
                "returned point is not extreme: active rank {rank} < {n} variables"
            )));
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9
    }

    #[test]
    fn single_lower_bound_row() {
        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, 1.0, 1.0);
        let r = lp.add_row(vec![(x, 1.0)], Sense::Ge, 0.3);
        let sol = solve_extreme(&lp).unwrap();
        assert!(approx(sol.values[x], 0.3));
        assert!(sol.tight[r]);
    }

    #[test]
    fn vertex_not_midpoint() {
        let mut lp = LpModel::new();
        let a = lp.add_var(0.0, 1.0, 1.0);
        let b = lp.add_var(0.0, 1.0, 1.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Ge, 1.0);
        let sol = solve_extreme(&lp).unwrap();
        assert!(approx(sol.objective, 1.0));
        let v = (sol.values[a], sol.values[b]);
        assert!(v == (1.0, 0.0) || v == (0.0, 1.0), "{v:?}");
        assert_eq!(float_rank(&sol.active_rows(&lp), 2), 2);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, f64::INFINITY, 0.0);
        lp.add_row(vec![(x, 1.0)], Sense::Ge, 1.0);
        lp.add_row(vec![(x, 1.0)], Sense::Le, 0.0);
        assert!(matches!(solve_extreme(&lp), Err(Error::Infeasible(_))));

        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, f64::INFINITY, -1.0);
        lp.add_row(vec![(x, 1.0)], Sense::Ge, 1.0);
        assert!(matches!(solve_extreme(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn equality_and_redundant_rows() {
        let mut lp = LpModel::new();
        let a = lp.add_var(0.0, 5.0, 2.0);
        let b = lp.add_var(0.0, 5.0, 3.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Eq, 4.0);
        lp.add_row(vec![(a, 2.0), (b, 2.0)], Sense::Eq, 8.0);
        lp.add_row(vec![(a, 1.0)], Sense::Le, 3.0);
        let sol = solve_extreme(&lp).unwrap();
        assert!(approx(sol.objective, 9.0), "{}", sol.objective);
        assert!(approx(sol.values[a], 3.0) && approx(sol.values[b], 1.0));
    }

    #[test]
    fn nonzero_lower_bounds_and_offset() {
        let mut lp = LpModel::new();
        let a = lp.add_var(1.0, 4.0, -1.0);
        let b = lp.add_var(2.0, 3.0, 1.0);
        lp.obj_offset = 10.0;
        lp.add_row(vec![(a, 1.0), (b, -1.0)], Sense::Le, 0.5);
        let sol = solve_extreme(&lp).unwrap();
        assert!(approx(sol.values[a], 2.5) && approx(sol.values[b], 2.0));
        assert!(approx(sol.objective, 9.5));
    }

    #[test]
    fn lp_text_dump() {
        let mut lp = LpModel::new();
        let a = lp.add_var(0.0, 1.0, 2.0);
        lp.add_row(vec![(a, -1.5)], Sense::Ge, -1.0);
        let text = lp.to_lp_text();
        assert!(text.contains("Minimize\n obj: + 2 x0"));
        assert!(text.contains(" c0: - 1.5 x0 >= -1"));
        assert!(text.contains(" 0 <= x0 <= 1"));
    }
}
