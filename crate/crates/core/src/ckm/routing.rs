//! Moving consolidated cluster demand onto open facilities through the meta-cluster tree.
//!
//! Order of assignment:
//! 1. every cluster with open facilities spreads its own demand evenly over them;
//! 2. inside each meta-cluster, a cluster without open facilities sends its demand to the
//!    nearest ancestor (along σ) that has some, spilling over the whole meta-cluster when
//!    that ancestor is full;
//! 3. demand still unassigned (only possible at a meta-cluster root) goes to the parent
//!    meta-cluster, or stays in the meta-cluster when it is a root.
//!
//! Spreads use residual capacity `κu - g_i` as weights, where `κ` is the capacity factor.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::clustering::ClusterSet;
use crate::hierarchy::Hierarchy;
use crate::instance::Instance;
use crate::report::{Check, Checks};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Routed {
    /// Load per facility.
    pub g: Vec<f64>,
    /// For each cluster, `(receiving cluster, amount)` sorted by receiver; amounts sum to `d_j`.
    pub sent: Vec<Vec<(usize, f64)>>,
    /// Clusters with no open facility.
    pub facility_less: Vec<usize>,
    /// `(meta-cluster, amount)` left unassigned inside its meta-cluster.
    pub leftovers: Vec<(usize, f64)>,
    pub capacity_factor: f64,
}

struct State<'a> {
    cs: &'a ClusterSet,
    cap: f64,
    g: Vec<f64>,
    sent: Vec<BTreeMap<usize, f64>>,
}

impl State<'_> {
    fn give(&mut self, from: usize, i: usize, amount: f64) {
        if amount <= 0.0 {
            return;
        }
        self.g[i] += amount;
        *self.sent[from].entry(self.cs.cluster_of[i]).or_insert(0.0) += amount;
    }

    fn residual(&self, facs: &[usize]) -> f64 {
        facs.iter().map(|&i| (self.cap - self.g[i]).max(0.0)).sum()
    }

    /// Spreads up to `amount` over `facs` proportionally to residual capacity; returns the rest.
    fn spread(&mut self, from: usize, facs: &[usize], amount: f64) -> f64 {
        let room = self.residual(facs);
        if room <= 0.0 || amount <= 0.0 {
            return amount;
        }
        let placed = amount.min(room);
        let weights: Vec<f64> = facs.iter().map(|&i| (self.cap - self.g[i]).max(0.0)).collect();
        for (&i, wgt) in facs.iter().zip(weights) {
            self.give(from, i, placed * wgt / room);
        }
        amount - placed
    }
}

pub fn route_demands(
    inst: &Instance,
    cs: &ClusterSet,
    h: &Hierarchy,
    open: &[usize],
    capacity_factor: f64,
) -> Result<Routed> {
    let n = inst.n_facilities();
    let kn = cs.clusters.len();
    let mut is_open = vec![false; n];
    for &i in open {
        is_open[i] = true;
    }
    let open_in: Vec<Vec<usize>> = cs
        .clusters
        .iter()
        .map(|c| c.facilities.iter().copied().filter(|&i| is_open[i]).collect())
        .collect();
    let mut st = State {
        cs,
        cap: capacity_factor * inst.u(),
        g: vec![0.0; n],
        sent: vec![BTreeMap::new(); kn],
    };

    for (k, c) in cs.clusters.iter().enumerate() {
        if !open_in[k].is_empty() {
            let share = c.demand / open_in[k].len() as f64;
            for &i in &open_in[k] {
                st.give(k, i, share);
            }
        }
    }
    let facility_less: Vec<usize> = (0..kn).filter(|&k| open_in[k].is_empty()).collect();

    let mut pending: Vec<f64> = vec![0.0; h.mcs.len()];
    for mc in &h.mcs {
        let mc_open: Vec<usize> = mc.members.iter().flat_map(|&k| open_in[k].iter().copied()).collect();
        // Deepest members first so that chains of empty clusters resolve bottom-up.
        let mut empties: Vec<usize> = mc.members.iter().copied().filter(|&k| open_in[k].is_empty()).collect();
        empties.sort_by_key(|&k| (std::cmp::Reverse(h.forest.depth[k]), cs.centers[k]));
        for k in empties {
            let d = cs.clusters[k].demand;
            if d <= 0.0 {
                continue;
            }
            let mut target = None;
            let mut v = k;
            while let Some(p) = h.forest.sigma[v] {
                if h.mc_of[p] != mc.id {
                    break;
                }
                if !open_in[p].is_empty() {
                    target = Some(p);
                    break;
                }
                v = p;
            }
            let rest = match target {
                Some(t) => {
                    let facs = open_in[t].clone();
                    let rest = st.spread(k, &facs, d);
                    st.spread(k, &mc_open, rest)
                }
                None if mc.parent.is_none() => st.spread(k, &mc_open, d),
                None => d,
            };
            if rest > 1e-12 {
                if mc.parent.is_none() || target.is_some() {
                    return Err(Error::falsified(
                        "route.capacity",
                        format!("meta-cluster {} cannot absorb {rest} units from center {}", mc.id, cs.centers[k]),
                    ));
                }
                pending[mc.id] += rest;
            }
        }
    }

    let mut leftovers = Vec::new();
    for mc in &h.mcs {
        let amount = pending[mc.id];
        if amount <= 0.0 {
            continue;
        }
        leftovers.push((mc.id, amount));
        let parent = &h.mcs[mc.parent.expect("leftover only in non-root meta-clusters")];
        let facs: Vec<usize> = parent.members.iter().flat_map(|&k| open_in[k].iter().copied()).collect();
        // Attribute the leftover to the empty clusters it came from, root first.
        let mut remaining = amount;
        let mut sources: Vec<usize> = mc.members.iter().copied().filter(|&k| open_in[k].is_empty()).collect();
        sources.sort_by_key(|&k| (h.forest.depth[k], cs.centers[k]));
        for k in sources {
            let already: f64 = st.sent[k].values().sum();
            let part = (cs.clusters[k].demand - already).min(remaining);
            if part <= 0.0 {
                continue;
            }
            let rest = st.spread(k, &facs, part);
            if rest > 1e-12 {
                return Err(Error::falsified(
                    "route.capacity",
                    format!("parent meta-cluster {} cannot absorb {rest} units from meta-cluster {}", parent.id, mc.id),
                ));
            }
            remaining -= part;
        }
    }

    Ok(Routed {
        g: st.g,
        sent: st.sent.into_iter().map(|m| m.into_iter().collect()).collect(),
        facility_less,
        leftovers,
        capacity_factor,
    })
}

impl Routed {
    /// `beta_slack` is how many openings an MC may fall short of `β` (one when only the larger
    /// fractional facility was opened).
    pub fn checks(&self, inst: &Instance, cs: &ClusterSet, h: &Hierarchy, open: &[usize], l: usize, beta_slack: usize) -> Checks {
        let u = inst.u();
        let mut out = Checks::default();
        let max_g = self.g.iter().copied().fold(0.0, f64::max);
        out.push(Check::le("route.capacity", max_g / u, self.capacity_factor, true));

        let mut conservation = Vec::new();
        for (k, c) in cs.clusters.iter().enumerate() {
            let s: f64 = self.sent[k].iter().map(|&(_, a)| a).sum();
            conservation.push(((s - c.demand).abs(), 1e-7 * c.demand.max(1.0), format!("center {}", c.center)));
        }
        out.push(Check::worst("route.conservation", true, conservation));

        let mut is_open = vec![false; inst.n_facilities()];
        for &i in open {
            is_open[i] = true;
        }
        let mut empties_ok = true;
        let mut beta_ok = true;
        let mut detail = String::new();
        for mc in &h.mcs {
            let empties: Vec<usize> = mc.members.iter().copied().filter(|k| self.facility_less.contains(k)).collect();
            if empties.len() > 2 || empties.iter().any(|&k| cs.clusters[k].is_dense()) {
                empties_ok = false;
                detail = format!("meta-cluster {} has empty clusters {:?}", mc.id, empties);
            }
            let opened = mc
                .members
                .iter()
                .flat_map(|&k| cs.clusters[k].facilities.iter())
                .filter(|&&i| is_open[i])
                .count();
            if opened + beta_slack < mc.beta {
                beta_ok = false;
            }
        }
        out.push(Check::holds("route.empty_clusters", empties_ok, true, detail));
        out.push(Check::holds("route.opened_at_least_beta", beta_ok, true, ""));

        let left_ok = self.leftovers.iter().all(|&(_, a)| a <= u + 1e-9);
        out.push(Check::holds("route.leftover_at_most_u", left_ok, true, format!("{:?}", self.leftovers)));

        let mut within = Vec::new();
        let mut across = Vec::new();
        for (k, c) in cs.clusters.iter().enumerate() {
            let sc = h.forest.sigma_cost[k];
            let mut inside = 0.0;
            let mut total = 0.0;
            for &(to, a) in &self.sent[k] {
                if to == k {
                    continue;
                }
                let dist = inst.cc(c.center, cs.centers[to]) * a;
                total += dist;
                if h.mc_of[to] == h.mc_of[k] {
                    inside += dist;
                }
            }
            if k != h.mcs[h.mc_of[k]].root {
                within.push((inside, 2.0 * c.demand * sc, format!("center {}", c.center)));
            }
            across.push((total, l as f64 * c.demand * sc, format!("center {}", c.center)));
        }
        out.push(Check::worst("route.travel_within_mc", false, within));
        out.push(Check::worst("route.travel_total", false, across));
        out
    }
}
