//! The cluster-level LP over facility openings `w`, with truncated sets and the witness point.

use serde::Serialize;

use crate::ckm::natural::FractionalSolution;
use crate::clustering::ClusterSet;
use crate::hierarchy::Hierarchy;
use crate::instance::Instance;
use crate::report::{le_tol, Check, Checks};

/// Truncated facility sets: `T_j = {i ∈ U(j) : c(i,j) ≤ c(j,σ(j))}` for sparse clusters,
/// `U(j)` for dense ones and for a sparse center with no neighbour at all.
pub fn truncated_sets(inst: &Instance, cs: &ClusterSet, h: &Hierarchy) -> Vec<Vec<usize>> {
    cs.clusters
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if c.is_dense() || h.forest.eta[k].is_none() {
                c.facilities.clone()
            } else {
                let r = h.forest.sigma_cost[k];
                c.facilities.iter().copied().filter(|&i| inst.c(i, c.center) <= r).collect()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    /// `Σ_{T_j} w ≤ 1`.
    SparseCap,
    /// `Σ_{T_j} w ≥ ⌊d_j/u⌋`.
    DenseFloor,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub cluster: usize,
    pub kind: RowKind,
    /// Variable indices of `T_j`.
    pub vars: Vec<usize>,
    pub rhs: f64,
    /// Index into [`Lp2::groups`] if the cluster belongs to a group with positive requirement.
    pub group: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub mc: usize,
    /// 1 for G¹, 2 for G².
    pub part: u8,
    /// Indices into [`Lp2::rows`].
    pub rows: Vec<usize>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SideRow {
    /// `Σ f_i w_i ≤ B`.
    Budget(f64),
    /// `Σ w_i ≤ k`.
    Cardinality(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lp2 {
    /// Facility of each variable.
    pub facs: Vec<usize>,
    pub var_of: Vec<Option<usize>>,
    pub obj: Vec<f64>,
    pub offset: f64,
    pub fcost: Vec<f64>,
    pub rows: Vec<ClusterRow>,
    pub groups: Vec<GroupRow>,
    pub side: SideRow,
    pub truncated: Vec<Vec<usize>>,
}

impl Lp2 {
    /// Objective at a per-facility opening vector.
    pub fn cost(&self, w: &[f64]) -> f64 {
        self.offset + self.facs.iter().zip(&self.obj).map(|(&i, c)| c * w[i]).sum::<f64>()
    }

    pub fn num_vars(&self) -> usize {
        self.facs.len()
    }

    /// Checks every constraint at a per-facility vector, with tolerance `tol`.
    pub fn violations(&self, w: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let val = |vars: &[usize]| vars.iter().map(|&v| w[self.facs[v]]).sum::<f64>();
        for (r, row) in self.rows.iter().enumerate() {
            let s = val(&row.vars);
            let bad = match row.kind {
                RowKind::SparseCap => s > row.rhs + tol,
                RowKind::DenseFloor => s < row.rhs - tol,
            };
            if bad {
                out.push(format!("cluster row {r}: {s} vs {}", row.rhs));
            }
        }
        for (g, grp) in self.groups.iter().enumerate() {
            let s: f64 = grp.rows.iter().map(|&r| val(&self.rows[r].vars)).sum();
            if s < grp.rhs - tol {
                out.push(format!("group {g}: {s} < {}", grp.rhs));
            }
        }
        let (lhs, rhs) = match self.side {
            SideRow::Budget(b) => (self.facs.iter().zip(&self.fcost).map(|(&i, f)| f * w[i]).sum::<f64>(), b),
            SideRow::Cardinality(k) => (self.facs.iter().map(|&i| w[i]).sum::<f64>(), k as f64),
        };
        if !le_tol(lhs, rhs + tol) {
            out.push(format!("side row: {lhs} > {rhs}"));
        }
        for (v, &i) in self.facs.iter().enumerate() {
            if w[i] < -tol || w[i] > 1.0 + tol {
                out.push(format!("variable {v} out of [0,1]: {}", w[i]));
            }
        }
        out
    }
}

/// Builds LP₂. With `facility_costs_in_objective`, `Σ f_i w_i` is added to the objective
/// (used by the k-facility variant).
pub fn build_lp2(
    inst: &Instance,
    cs: &ClusterSet,
    h: &Hierarchy,
    side: SideRow,
    facility_costs_in_objective: bool,
) -> Lp2 {
    let n = inst.n_facilities();
    let u = inst.u();
    let truncated = truncated_sets(inst, cs, h);
    let mut var_of = vec![None; n];
    let mut facs = Vec::new();
    for (k, c) in cs.clusters.iter().enumerate() {
        for &i in &c.facilities {
            if c.is_dense() || truncated[k].contains(&i) {
                var_of[i] = Some(facs.len());
                facs.push(i);
            }
        }
    }
    let mut order: Vec<usize> = (0..facs.len()).collect();
    order.sort_by_key(|&v| facs[v]);
    let mut remap = vec![0; facs.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let facs: Vec<usize> = order.iter().map(|&v| facs[v]).collect();
    for slot in var_of.iter_mut().flatten() {
        *slot = remap[*slot];
    }

    let mut obj = vec![0.0; facs.len()];
    let mut offset = 0.0;
    for (k, c) in cs.clusters.iter().enumerate() {
        let j = c.center;
        if c.is_dense() {
            for &i in &truncated[k] {
                obj[var_of[i].unwrap()] += u * inst.c(i, j);
            }
        } else {
            let cs_ = h.forest.sigma_cost[k];
            offset += c.demand * cs_;
            for &i in &truncated[k] {
                obj[var_of[i].unwrap()] += c.demand * (inst.c(i, j) - cs_);
            }
        }
    }
    if facility_costs_in_objective {
        for (v, &i) in facs.iter().enumerate() {
            obj[v] += inst.fcost(i);
        }
    }

    let mut rows = Vec::new();
    let mut row_of = vec![None; cs.clusters.len()];
    for (k, c) in cs.clusters.iter().enumerate() {
        let vars: Vec<usize> = truncated[k].iter().map(|&i| var_of[i].unwrap()).collect();
        let (kind, rhs) = if c.is_dense() {
            (RowKind::DenseFloor, c.floor_du(u) as f64)
        } else {
            (RowKind::SparseCap, 1.0)
        };
        if vars.is_empty() && kind == RowKind::SparseCap {
            continue;
        }
        row_of[k] = Some(rows.len());
        rows.push(ClusterRow {
            cluster: k,
            kind,
            vars,
            rhs,
            group: None,
        });
    }

    let mut groups = Vec::new();
    for mc in &h.mcs {
        for (part, members, req) in [(1u8, &mc.g1, mc.gamma), (2u8, &mc.g2, mc.s2)] {
            if req == 0 {
                continue;
            }
            let g = groups.len();
            let grp_rows: Vec<usize> = members.iter().filter_map(|&k| row_of[k]).collect();
            for &r in &grp_rows {
                rows[r].group = Some(g);
            }
            groups.push(GroupRow {
                mc: mc.id,
                part,
                rows: grp_rows,
                rhs: req as f64,
            });
        }
    }
    Lp2 {
        fcost: facs.iter().map(|&i| inst.fcost(i)).collect(),
        facs,
        var_of,
        obj,
        offset,
        rows,
        groups,
        side,
        truncated,
    }
}

/// The explicit feasible point: `l_i/u` on dense clusters, `x*_{ij}` on sparse `T_j`.
pub fn witness(inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, lp2: &Lp2) -> Vec<f64> {
    let mut w = vec![0.0; inst.n_facilities()];
    for (k, c) in cs.clusters.iter().enumerate() {
        for &i in &lp2.truncated[k] {
            w[i] = if c.is_dense() {
                cs.load[i] / inst.u()
            } else {
                sol.x(i, c.center)
            };
        }
    }
    w
}

pub fn witness_checks(lp2: &Lp2, w: &[f64], l: usize, lp_opt: f64) -> Checks {
    let mut out = Checks::default();
    let v = lp2.violations(w, 1e-7);
    out.push(Check::holds("lp2.witness_feasible", v.is_empty(), true, v.join("; ")));
    let bound = (2.0 * l as f64 + 13.0) * lp_opt;
    out.push(Check::le("lp2.witness_cost", lp2.cost(w), bound, true));
    out
}

/// B(j) ⊆ T_j for every sparse cluster.
pub fn ball_in_truncated(cs: &ClusterSet, lp2: &Lp2) -> Check {
    let bad: Vec<usize> = cs
        .clusters
        .iter()
        .enumerate()
        .filter(|(k, c)| !c.is_dense() && !c.ball.iter().all(|i| lp2.truncated[*k].contains(i)))
        .map(|(_, c)| c.center)
        .collect();
    Check::holds("lp2.ball_in_truncated", bad.is_empty(), true, format!("centers {bad:?}"))
}
