//! Filtering of clients into well-separated centers and the facility clusters around them.

use std::fmt::Write as _;

use serde::Serialize;

use crate::ckm::natural::FractionalSolution;
use crate::instance::{cmp_dist, Instance};
use crate::report::{Check, Checks};
use crate::{floor_tol, LP_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    Sparse,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// Client id of the center.
    pub center: usize,
    pub radius: f64,
    pub ball: Vec<usize>,
    /// Facilities whose nearest center is this one, sorted by id.
    pub facilities: Vec<usize>,
    pub demand: f64,
    pub label: Label,
    /// `Σ_{i∈U(j)} y*_i f_i`.
    pub fbar: f64,
    /// `Σ_{j'} Σ_{i∈U(j)} x*_{ij'} (c(i,j') + 2l C̄_{j'})`.
    pub pi: f64,
}

impl Cluster {
    pub fn is_dense(&self) -> bool {
        self.label == Label::Dense
    }

    /// `⌊d_j / u⌋` with tolerance for values a hair below an integer.
    pub fn floor_du(&self, u: f64) -> usize {
        floor_tol(self.demand / u).max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSet {
    pub l: usize,
    /// Average connection cost per client.
    pub cbar: Vec<f64>,
    /// Center client ids in selection order.
    pub centers: Vec<usize>,
    /// For every client, the center that removed it (itself for centers).
    pub ctr: Vec<usize>,
    /// One entry per center, same order as `centers`.
    pub clusters: Vec<Cluster>,
    /// Index into `clusters` for each facility.
    pub cluster_of: Vec<usize>,
    /// `l_i = Σ_j x*_ij`.
    pub load: Vec<f64>,
}

pub fn avg_costs(inst: &Instance, sol: &FractionalSolution) -> Vec<f64> {
    (0..inst.n_clients())
        .map(|j| {
            (0..inst.n_facilities())
                .map(|i| sol.x(i, j) * inst.c(i, j))
                .sum()
        })
        .collect()
}

/// Greedy filtering by non-decreasing radius; returns `(centers, ctr)`.
pub fn select_centers(inst: &Instance, cbar: &[f64], l: usize) -> (Vec<usize>, Vec<usize>) {
    let m = inst.n_clients();
    let lf = l as f64;
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| (lf * cbar[a]).total_cmp(&(lf * cbar[b])).then(a.cmp(&b)));
    let mut removed = vec![false; m];
    let mut ctr = vec![usize::MAX; m];
    let mut centers = Vec::new();
    for &j in &order {
        if removed[j] {
            continue;
        }
        centers.push(j);
        for jp in 0..m {
            if !removed[jp] && inst.cc(j, jp) <= 2.0 * lf * cbar[jp] {
                removed[jp] = true;
                ctr[jp] = j;
            }
        }
        removed[j] = true;
        ctr[j] = j;
    }
    (centers, ctr)
}

/// Completes the cluster set: clusters, balls, loads, demands, labels and budgets.
pub fn build_clusters(inst: &Instance, sol: &FractionalSolution, l: usize) -> ClusterSet {
    let cbar = avg_costs(inst, sol);
    let (centers, ctr) = select_centers(inst, &cbar, l);
    let n = inst.n_facilities();
    let m = inst.n_clients();
    let lf = l as f64;
    let u = inst.u();

    let cluster_of: Vec<usize> = (0..n)
        .map(|i| {
            (0..centers.len())
                .min_by(|&a, &b| {
                    cmp_dist(inst.c(i, centers[a]), centers[a], inst.c(i, centers[b]), centers[b])
                })
                .expect("at least one center")
        })
        .collect();
    let load: Vec<f64> = (0..n).map(|i| sol.load(i)).collect();

    let clusters = centers
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            let facilities: Vec<usize> = (0..n).filter(|&i| cluster_of[i] == k).collect();
            let radius = lf * cbar[j];
            let ball = (0..n).filter(|&i| inst.c(i, j) <= radius).collect();
            let demand: f64 = facilities.iter().map(|&i| load[i]).sum();
            let label = if demand >= u - LP_TOL { Label::Dense } else { Label::Sparse };
            let fbar = facilities.iter().map(|&i| sol.y[i] * inst.fcost(i)).sum();
            let pi = facilities
                .iter()
                .flat_map(|&i| (0..m).map(move |jp| (i, jp)))
                .map(|(i, jp)| sol.x(i, jp) * (inst.c(i, jp) + 2.0 * lf * cbar[jp]))
                .sum();
            Cluster {
                center: j,
                radius,
                ball,
                facilities,
                demand,
                label,
                fbar,
                pi,
            }
        })
        .collect();
    ClusterSet {
        l,
        cbar,
        centers,
        ctr,
        clusters,
        cluster_of,
        load,
    }
}

impl ClusterSet {
    pub fn index_of_center(&self, client: usize) -> Option<usize> {
        self.centers.iter().position(|&c| c == client)
    }

    /// `x*(j', U(j))` for cluster index `k`.
    pub fn mass(&self, sol: &FractionalSolution, jp: usize, k: usize) -> f64 {
        self.clusters[k].facilities.iter().map(|&i| sol.x(i, jp)).sum()
    }

    /// Structural and cost inequalities of the filtering step.
    pub fn checks(&self, inst: &Instance, sol: &FractionalSolution, lp_opt: f64) -> Checks {
        let lf = self.l as f64;
        let m = inst.n_clients();
        let mut out = Checks::default();

        let mut partition_ok = true;
        let mut seen = vec![0usize; inst.n_facilities()];
        for c in &self.clusters {
            for &i in &c.facilities {
                seen[i] += 1;
            }
            partition_ok &= c.ball.iter().all(|i| c.facilities.contains(i));
        }
        partition_ok &= seen.iter().all(|&s| s == 1);
        out.push(Check::holds("clusters.partition", partition_ok, true, "U(j) partition F and contain B(j)"));

        let demand_sum: f64 = self.clusters.iter().map(|c| c.demand).sum();
        out.push(Check::le("clusters.demand_sum", (demand_sum - m as f64).abs(), 1e-6 * (m as f64).max(1.0), true));

        let pairs = self.centers.iter().flat_map(|&a| self.centers.iter().map(move |&b| (a, b)));
        out.push(Check::worst(
            "clusters.separation",
            true,
            pairs.filter(|(a, b)| a < b).map(|(a, b)| {
                let need = 2.0 * lf * self.cbar[a].max(self.cbar[b]);
                (need, inst.cc(a, b), format!("centers {a},{b}"))
            }),
        ));

        out.push(Check::worst(
            "clusters.ball_mass",
            true,
            self.clusters.iter().map(|c| {
                let mass: f64 = c.ball.iter().map(|&i| sol.y[i]).sum();
                (1.0 - 1.0 / lf, mass + LP_TOL, format!("center {}", c.center))
            }),
        ));

        let mut l1i = Vec::new();
        let mut l1iii = Vec::new();
        for (k, c) in self.clusters.iter().enumerate() {
            let j = c.center;
            for &i in &c.facilities {
                for (k2, &jp) in self.centers.iter().enumerate() {
                    if k2 != k {
                        l1i.push((inst.cc(j, jp), 2.0 * inst.c(i, jp), format!("i={i} j={j} j'={jp}")));
                    }
                }
                for jp in 0..m {
                    l1iii.push((
                        inst.c(i, j),
                        inst.c(i, jp) + 2.0 * lf * self.cbar[jp],
                        format!("i={i} j={j} j'={jp}"),
                    ));
                }
            }
        }
        out.push(Check::worst("clusters.center_distance", true, l1i));
        out.push(Check::worst("clusters.facility_detour", true, l1iii));

        let mut radius_cases = Vec::new();
        for &j in &self.centers {
            let rj = lf * self.cbar[j];
            for jp in 0..m {
                if self.ctr[jp] != jp && inst.cc(j, jp) <= rj {
                    radius_cases.push((rj, 2.0 * lf * self.cbar[jp], format!("j={j} j'={jp}")));
                }
            }
        }
        out.push(Check::worst("clusters.radius_ratio", true, radius_cases));

        let consolidation: f64 = (0..m)
            .map(|jp| {
                self.clusters
                    .iter()
                    .enumerate()
                    .map(|(k, c)| inst.cc(c.center, jp) * self.mass(sol, jp, k))
                    .sum::<f64>()
            })
            .sum();
        out.push(Check::le("clusters.consolidation", consolidation, 2.0 * (lf + 1.0) * lp_opt, true));

        let weighted: f64 = self.clusters.iter().map(|c| c.demand * self.cbar[c.center]).sum();
        out.push(Check::le("clusters.weighted_avg_cost", weighted, 3.0 * lp_opt, true));
        out
    }

    /// CSV dump: center, radius, demand, label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center,radius,demand,label,n_facilities\n");
        for c in &self.clusters {
            let label = match c.label {
                Label::Sparse => "sparse",
                Label::Dense => "dense",
            };
            writeln!(out, "{},{},{},{},{}", c.center, c.radius, c.demand, label, c.facilities.len()).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Problem, SideConstraint};

    fn inst(fac: &[f64], cli: &[f64]) -> Instance {
        let mut coords: Vec<Vec<f64>> = fac.iter().map(|&x| vec![x]).collect();
        coords.extend(cli.iter().map(|&x| vec![x]));
        Instance::from_coords(Problem::Cflp, vec![1.0; fac.len()], cli.len(), 2, SideConstraint::None, 1, coords)
            .unwrap()
    }

    fn frac(n: usize, m: usize, x: Vec<f64>, y: Vec<f64>) -> FractionalSolution {
        FractionalSolution {
            n_facilities: n,
            n_clients: m,
            x,
            y,
            objective: 0.0,
            connection_cost: 0.0,
            facility_cost: 0.0,
        }
    }

    #[test]
    fn weighted_mean_cost() {
        let i = inst(&[2.0, -4.0], &[0.0]);
        let s = frac(2, 1, vec![0.5, 0.5], vec![0.5, 0.5]);
        assert_eq!(avg_costs(&i, &s), vec![3.0]);
    }

    #[test]
    fn colocated_clients_share_center() {
        let i = inst(&[0.0], &[5.0, 5.0]);
        let s = frac(1, 2, vec![1.0, 1.0], vec![1.0]);
        let cbar = avg_costs(&i, &s);
        let (centers, ctr) = select_centers(&i, &cbar, 5);
        assert_eq!(centers, vec![0]);
        assert_eq!(ctr, vec![0, 0]);
        let cs = build_clusters(&i, &s, 5);
        assert_eq!(cs.clusters[0].facilities, vec![0]);
        assert_eq!(cs.clusters[0].demand, 2.0);
        assert_eq!(cs.clusters[0].label, Label::Dense);
    }

    #[test]
    fn equidistant_facility_goes_to_smaller_center() {
        let i = inst(&[0.0, 10.0, 5.0], &[0.0, 10.0]);
        let s = frac(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]);
        let cs = build_clusters(&i, &s, 2);
        assert_eq!(cs.centers, vec![0, 1]);
        assert_eq!(cs.cluster_of, vec![0, 1, 0]);
    }
}
