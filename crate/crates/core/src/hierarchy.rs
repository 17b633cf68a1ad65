//! Center forest, its binarization, meta-clusters and their G¹/G² split.
//!
//! All nodes are cluster indices (positions in [`ClusterSet::clusters`]); ties between
//! equal distances are broken by the center's client id.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Serialize;

use crate::ckm::natural::FractionalSolution;
use crate::clustering::ClusterSet;
use crate::instance::{cmp_dist, Instance};
use crate::report::{Check, Checks};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterForest {
    /// Nearest other center for sparse clusters, self for dense ones, `None` for a lone sparse center.
    pub eta: Vec<Option<usize>>,
    /// Edges `(from, to)` removed to break cycles.
    pub removed: Vec<(usize, usize)>,
    /// Parent in the binarized forest.
    pub sigma: Vec<Option<usize>>,
    /// `c(j, σ(j))`; for roots the cost of the edge to `η(j)` (zero for dense roots).
    pub sigma_cost: Vec<f64>,
    /// Children in the binarized forest (at most two: first child, next sibling).
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    pub roots: Vec<usize>,
}

impl CenterForest {
    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// Parent in the unbinarized forest (after cycle removal).
    pub fn tree_parent(&self, k: usize) -> Option<usize> {
        match self.eta[k] {
            Some(p) if p != k && !self.removed.contains(&(k, p)) => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResCase {
    /// `res(j_d) < ε`: the first sparse cluster stays in G².
    Small,
    /// `res(j_d) ≥ ε`: the first sparse cluster (if any) joins G¹.
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaCluster {
    pub id: usize,
    pub root: usize,
    /// Member clusters in order of inclusion (root first).
    pub members: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Connecting edge `(r, s')` and its cost; for a root MC, `s'` is `None`.
    pub connecting: (usize, Option<usize>, f64),
    pub p: usize,
    pub q: usize,
    pub t: usize,
    pub dense: Option<usize>,
    pub first_sparse: Option<usize>,
    pub g1: Vec<usize>,
    pub g2: Vec<usize>,
    pub gamma: usize,
    pub q_prime: usize,
    /// Requirement on G²: `max(0, q'_r - 1)`, raised to 1 for a lone sparse center.
    pub s2: usize,
    pub res: Option<f64>,
    pub case: Option<ResCase>,
    pub beta: usize,
    pub in_m1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hierarchy {
    pub forest: CenterForest,
    pub mcs: Vec<MetaCluster>,
    pub mc_of: Vec<usize>,
    /// Threshold on `res(j_d)` used by the G¹/G² split.
    pub eps: f64,
}

fn center_dist(inst: &Instance, cs: &ClusterSet, a: usize, b: usize) -> f64 {
    inst.cc(cs.centers[a], cs.centers[b])
}

fn cmp_centers(inst: &Instance, cs: &ClusterSet, from: usize, a: usize, b: usize) -> Ordering {
    cmp_dist(
        center_dist(inst, cs, from, a),
        cs.centers[a],
        center_dist(inst, cs, from, b),
        cs.centers[b],
    )
}

pub fn build_forest(inst: &Instance, cs: &ClusterSet) -> CenterForest {
    let k = cs.clusters.len();
    let eta: Vec<Option<usize>> = (0..k)
        .map(|a| {
            if cs.clusters[a].is_dense() {
                Some(a)
            } else {
                (0..k).filter(|&b| b != a).min_by(|&x, &y| cmp_centers(inst, cs, a, x, y))
            }
        })
        .collect();

    // Break cycles among the non-self edges at their smallest-id node.
    let mut parent: Vec<Option<usize>> = (0..k).map(|a| eta[a].filter(|&p| p != a)).collect();
    let mut removed = Vec::new();
    let mut state = vec![0u8; k];
    for start in 0..k {
        let mut path = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            path.push(v);
            match parent[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        if state[v] == 1 && parent[v].is_some() && path.contains(&v) {
            let pos = path.iter().position(|&x| x == v).unwrap();
            let cycle = &path[pos..];
            let cut = *cycle.iter().min_by_key(|&&x| cs.centers[x]).unwrap();
            removed.push((cut, parent[cut].unwrap()));
            parent[cut] = None;
        }
        for &x in &path {
            state[x] = 2;
        }
    }

    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); k];
    for a in 0..k {
        if let Some(p) = parent[a] {
            kids[p].push(a);
        }
    }
    let mut sigma = vec![None; k];
    let mut children = vec![Vec::new(); k];
    for v in 0..k {
        kids[v].sort_by(|&a, &b| cmp_centers(inst, cs, v, a, b));
        let mut prev = v;
        for &c in &kids[v] {
            sigma[c] = Some(prev);
            children[prev].push(c);
            prev = c;
        }
    }
    let sigma_cost: Vec<f64> = (0..k)
        .map(|a| match (sigma[a], eta[a]) {
            (Some(s), _) => center_dist(inst, cs, a, s),
            (None, Some(e)) => center_dist(inst, cs, a, e),
            (None, None) => 0.0,
        })
        .collect();
    let mut roots: Vec<usize> = (0..k).filter(|&a| sigma[a].is_none()).collect();
    roots.sort_by_key(|&a| cs.centers[a]);
    let mut depth = vec![0; k];
    let mut stack: Vec<usize> = roots.clone();
    while let Some(v) = stack.pop() {
        for &c in &children[v] {
            depth[c] = depth[v] + 1;
            stack.push(c);
        }
    }
    CenterForest {
        eta,
        removed,
        sigma,
        sigma_cost,
        children,
        depth,
        roots,
    }
}

/// Greedy top-down grouping into meta-clusters of (at most) `l` clusters.
pub fn form_meta_clusters(cs: &ClusterSet, forest: &CenterForest, l: usize) -> (Vec<MetaCluster>, Vec<usize>) {
    let k = forest.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&a| (forest.depth[a], cs.centers[a]));
    let mut mc_of = vec![usize::MAX; k];
    let mut mcs: Vec<MetaCluster> = Vec::new();
    for &r in &order {
        if mc_of[r] != usize::MAX {
            continue;
        }
        let id = mcs.len();
        let mut members = vec![r];
        mc_of[r] = id;
        while members.len() < l {
            let next = members
                .iter()
                .flat_map(|&v| forest.children[v].iter().copied())
                .filter(|&w| mc_of[w] == usize::MAX)
                .min_by(|&a, &b| {
                    cmp_dist(forest.sigma_cost[a], cs.centers[a], forest.sigma_cost[b], cs.centers[b])
                });
            match next {
                Some(w) => {
                    mc_of[w] = id;
                    members.push(w);
                }
                None => break,
            }
        }
        let parent_node = forest.sigma[r];
        mcs.push(MetaCluster {
            id,
            root: r,
            members,
            parent: parent_node.map(|s| mc_of[s]),
            children: Vec::new(),
            connecting: (r, parent_node, forest.sigma_cost[r]),
            p: 0,
            q: 0,
            t: 0,
            dense: None,
            first_sparse: None,
            g1: Vec::new(),
            g2: Vec::new(),
            gamma: 0,
            q_prime: 0,
            s2: 0,
            res: None,
            case: None,
            beta: 0,
            in_m1: false,
        });
    }
    for id in 0..mcs.len() {
        if let Some(p) = mcs[id].parent {
            mcs[p].children.push(id);
        }
    }
    (mcs, mc_of)
}

/// Splits a meta-cluster into G¹ (dense root and possibly the first sparse cluster) and G².
pub fn partition_g1_g2(mc: &mut MetaCluster, cs: &ClusterSet, forest: &CenterForest, u: f64, eps: f64) {
    let dense: Vec<usize> = mc.members.iter().copied().filter(|&a| cs.clusters[a].is_dense()).collect();
    let sparse: Vec<usize> = mc.members.iter().copied().filter(|&a| !cs.clusters[a].is_dense()).collect();
    mc.p = dense.len();
    mc.q = sparse.len();
    mc.t = mc.members.len();
    mc.dense = dense.first().copied();
    mc.first_sparse = sparse.first().copied();
    mc.in_m1 = mc.p == 1 && mc.q == 1;
    match mc.dense {
        None => {
            mc.g1.clear();
            mc.gamma = 0;
            mc.g2 = sparse;
            mc.q_prime = mc.q;
            mc.res = None;
            mc.case = None;
        }
        Some(jd) => {
            let d = cs.clusters[jd].demand;
            let fl = cs.clusters[jd].floor_du(u);
            let res = (d / u - fl as f64).max(0.0);
            mc.res = Some(res);
            if res < eps {
                mc.case = Some(ResCase::Small);
                mc.g1 = vec![jd];
                mc.gamma = fl;
                mc.g2 = sparse;
                mc.q_prime = mc.q;
            } else if let Some(js) = mc.first_sparse {
                mc.case = Some(ResCase::Large);
                mc.g1 = vec![jd, js];
                mc.gamma = fl + 1;
                mc.g2 = sparse.into_iter().filter(|&a| a != js).collect();
                mc.q_prime = mc.q - 1;
            } else {
                mc.case = Some(ResCase::Large);
                mc.g1 = vec![jd];
                mc.gamma = fl;
                mc.g2.clear();
                mc.q_prime = 0;
            }
        }
    }
    mc.s2 = mc.q_prime.saturating_sub(1);
    let lone = mc.parent.is_none()
        && mc.dense.is_none()
        && mc.members.len() == 1
        && forest.eta[mc.root].is_none();
    if lone {
        mc.s2 = 1;
    }
    let fl = mc.dense.map_or(0, |jd| cs.clusters[jd].floor_du(u));
    mc.beta = if mc.in_m1 {
        match mc.case {
            Some(ResCase::Large) => fl + 1,
            _ => fl,
        }
    } else {
        fl + mc.q.saturating_sub(1)
    };
}

/// Forest, meta-clusters and partitions in one call.
pub fn build_hierarchy(inst: &Instance, cs: &ClusterSet, eps: f64) -> Hierarchy {
    let forest = build_forest(inst, cs);
    let (mut mcs, mc_of) = form_meta_clusters(cs, &forest, cs.l);
    for mc in mcs.iter_mut() {
        partition_g1_g2(mc, cs, &forest, inst.u(), eps);
    }
    Hierarchy { forest, mcs, mc_of, eps }
}

impl Hierarchy {
    pub fn checks(&self, inst: &Instance, cs: &ClusterSet, sol: &FractionalSolution, lp_opt: f64) -> Checks {
        let f = &self.forest;
        let k = f.len();
        let l = cs.l;
        let mut out = Checks::default();

        out.push(Check::worst(
            "hierarchy.binarize_stretch",
            true,
            (0..k).filter_map(|a| {
                let s = f.sigma[a]?;
                let e = f.eta[a].filter(|&e| e != a)?;
                Some((
                    center_dist(inst, cs, a, s),
                    2.0 * center_dist(inst, cs, a, e),
                    format!("center {}", cs.centers[a]),
                ))
            }),
        ));

        let indeg_ok = f.roots.iter().all(|&r| f.children[r].len() <= 1);
        out.push(Check::holds("hierarchy.root_indegree", indeg_ok, true, "roots of the binarized forest"));

        out.push(Check::worst(
            "hierarchy.edge_monotone",
            false,
            (0..k).filter_map(|a| {
                let s = f.sigma[a]?;
                let ss = f.sigma[s]?;
                Some((
                    center_dist(inst, cs, s, ss),
                    center_dist(inst, cs, a, s),
                    format!("center {}", cs.centers[a]),
                ))
            }),
        ));

        let mut size_ok = true;
        let mut dense_ok = true;
        for mc in &self.mcs {
            if !mc.children.is_empty() && mc.members.len() != l {
                size_ok = false;
            }
            if mc.members.len() > l {
                size_ok = false;
            }
            if mc.p > 1 || (mc.p == 1 && (mc.parent.is_some() || mc.dense != Some(mc.root))) {
                dense_ok = false;
            }
        }
        out.push(Check::holds("hierarchy.mc_size", size_ok, true, "non-leaf MCs have l members"));
        out.push(Check::holds("hierarchy.mc_dense_root", dense_ok, true, "dense clusters are roots of root MCs"));

        let mut sandwich = Vec::new();
        for mc in &self.mcs {
            let Some(pid) = mc.parent else { continue };
            let conn = mc.connecting.2;
            let parent = &self.mcs[pid];
            for &v in parent.members.iter().filter(|&&v| v != parent.root) {
                sandwich.push((f.sigma_cost[v], conn, format!("mc {} above {}", pid, mc.id)));
            }
            for &v in mc.members.iter().filter(|&&v| v != mc.root) {
                sandwich.push((conn, f.sigma_cost[v], format!("mc {} below {}", mc.id, pid)));
            }
        }
        out.push(Check::worst("hierarchy.mc_sandwich", false, sandwich));

        // Σ_{j∈C_S} d_j (Σ_{i∈U(j)} c(i,j) x*_ij + c(j,σ(j)) (1 - x*(j, U(j)))) ≤ 12 LP_opt.
        let sparse_sum: f64 = (0..k)
            .filter(|&a| !cs.clusters[a].is_dense())
            .map(|a| {
                let c = &cs.clusters[a];
                let j = c.center;
                let inside: f64 = c.facilities.iter().map(|&i| inst.c(i, j) * sol.x(i, j)).sum();
                let mass: f64 = c.facilities.iter().map(|&i| sol.x(i, j)).sum();
                c.demand * (inside + f.sigma_cost[a] * (1.0 - mass).max(0.0))
            })
            .sum();
        out.push(Check::le("hierarchy.sparse_sigma_cost", sparse_sum, 12.0 * lp_opt, true));
        out
    }

    /// DOT-style dump of the binarized forest with meta-cluster membership.
    pub fn to_dot(&self, cs: &ClusterSet) -> String {
        let mut out = String::from("digraph centers {\n");
        for mc in &self.mcs {
            writeln!(out, "  subgraph cluster_mc{} {{ label=\"MC {} gamma={} s2={}\";", mc.id, mc.id, mc.gamma, mc.s2).unwrap();
            for &v in &mc.members {
                let c = &cs.clusters[v];
                writeln!(
                    out,
                    "    c{} [label=\"{} d={:.3}{}\"];",
                    c.center,
                    c.center,
                    c.demand,
                    if c.is_dense() { " dense" } else { "" }
                )
                .unwrap();
            }
            out.push_str("  }\n");
        }
        for (a, s) in self.forest.sigma.iter().enumerate() {
            if let Some(s) = s {
                writeln!(
                    out,
                    "  c{} -> c{} [label=\"{:.3}\"];",
                    cs.centers[a], cs.centers[*s], self.forest.sigma_cost[a]
                )
                .unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}
