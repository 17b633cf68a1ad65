//! Exact simplex over arbitrary-precision rationals (dense tableau, Bland's rule).
//!
//! Only meant for small models: every entry is a `BigRational`, and no effort is made to
//! keep the tableau sparse.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::solvers::lp::{LpModel, Sense};
use crate::{Error, Result};

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite value")
}

#[derive(Debug, Clone)]
pub struct RationalSolution {
    pub values: Vec<Q>,
    pub objective: Q,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] = &self.rhs[i] - &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over the columns allowed by `allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: &dyn Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        loop {
            let mut entering = None;
            for j in 0..ncols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() && !cost[b].is_zero() {
                        d -= &cost[b] * &self.rows[i][j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves `model` exactly. Coefficients are converted from `f64` without rounding.
pub fn rational_lp_solve(model: &LpModel) -> Result<RationalSolution> {
    let n = model.num_vars();
    let lo: Vec<Q> = model.vars.iter().map(|v| q(v.lower)).collect();

    // Constraint list over shifted variables y = x - lo >= 0.
    let mut cons: Vec<(Vec<Q>, Sense, Q)> = Vec::new();
    for r in &model.rows {
        let mut a = vec![Q::zero(); n];
        for &(j, v) in &r.coeffs {
            a[j] += q(v);
        }
        let shift: Q = a.iter().zip(&lo).fold(Q::zero(), |acc, (x, l)| acc + x * l);
        cons.push((a, r.sense, q(r.rhs) - shift));
    }
    for (j, v) in model.vars.iter().enumerate() {
        if v.upper.is_finite() {
            let mut a = vec![Q::zero(); n];
            a[j] = Q::one();
            cons.push((a, Sense::Le, q(v.upper) - &lo[j]));
        }
    }

    let m = cons.len();
    let n_slack = cons.iter().filter(|c| c.1 != Sense::Eq).count();
    let ncols = n + n_slack + m;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut slack = n;
    for (i, (a, sense, b)) in cons.into_iter().enumerate() {
        let mut row = vec![Q::zero(); ncols];
        row[..n].clone_from_slice(&a);
        match sense {
            Sense::Le => {
                row[slack] = Q::one();
                slack += 1;
            }
            Sense::Ge => {
                row[slack] = -Q::one();
                slack += 1;
            }
            Sense::Eq => {}
        }
        let mut b = b;
        if b.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        row[n + n_slack + i] = Q::one();
        rows.push(row);
        rhs.push(b);
    }
    let art0 = n + n_slack;
    let mut t = Tableau {
        rows,
        rhs,
        basis: (art0..ncols).collect(),
    };

    let mut cost1 = vec![Q::zero(); ncols];
    for c in cost1.iter_mut().skip(art0) {
        *c = Q::one();
    }
    t.optimize(&cost1, &|_| true);
    let infeas: Q = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&b, _)| b >= art0)
        .fold(Q::zero(), |acc, (_, v)| acc + v);
    if infeas.is_positive() {
        return Err(Error::Infeasible("exact phase one is positive".into()));
    }
    // Drive artificials out; rows where that is impossible are redundant and dropped.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= art0 {
            if let Some(c) = (0..art0).find(|&c| !t.rows[r][c].is_zero()) {
                t.pivot(r, c);
            } else {
                t.rows.remove(r);
                t.rhs.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    let mut cost2 = vec![Q::zero(); ncols];
    for (j, v) in model.vars.iter().enumerate() {
        cost2[j] = q(v.obj);
    }
    if !t.optimize(&cost2, &|j| j < art0) {
        return Err(Error::Unbounded);
    }
    let mut values = lo.clone();
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            values[b] += &t.rhs[i];
        }
    }
    let objective = model
        .vars
        .iter()
        .zip(&values)
        .fold(q(model.obj_offset), |acc, (v, x)| acc + q(v.obj) * x);
    Ok(RationalSolution { values, objective })
}

/// Exact rank of a rational matrix.
pub fn rational_rank(rows: &[Vec<Q>]) -> usize {
    let mut a = rows.to_vec();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let prow = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] / &prow[col];
            for c in col..ncols {
                if !prow[c].is_zero() {
                    row[c] -= &f * &prow[c];
                }
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    rank
}

/// Rank, in exact arithmetic, of the constraints active at `x` (within `tol`).
pub fn active_rank(model: &LpModel, x: &[f64], tol: f64) -> usize {
    let n = model.num_vars();
    let mut rows = Vec::new();
    for r in &model.rows {
        let act: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
        if r.sense == Sense::Eq || (act - r.rhs).abs() <= tol {
            let mut row = vec![Q::zero(); n];
            for &(j, a) in &r.coeffs {
                row[j] += q(a);
            }
            rows.push(row);
        }
    }
    for (j, v) in model.vars.iter().enumerate() {
        if (x[j] - v.lower).abs() <= tol || (v.upper.is_finite() && (x[j] - v.upper).abs() <= tol) {
            let mut row = vec![Q::zero(); n];
            row[j] = Q::one();
            rows.push(row);
        }
    }
    rational_rank(&rows)
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}
