//! Min-cost flow with integral capacities via successive shortest paths.
//!
//! Reduced costs are kept non-negative with node potentials, initialised by Bellman-Ford
//! so that negative arc costs are accepted as long as there is no negative cycle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    n: usize,
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Flow on each edge, indexed by the id returned from [`FlowNetwork::add_edge`].
    pub flow: Vec<i64>,
    pub value: i64,
    pub cost: f64,
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl FlowNetwork {
    pub fn new(n_nodes: usize) -> Self {
        FlowNetwork {
            n: n_nodes,
            arcs: Vec::new(),
            adj: vec![Vec::new(); n_nodes],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        assert!(from < self.n && to < self.n, "edge endpoint out of range");
        assert!(cap >= 0, "negative capacity");
        let id = self.arcs.len() / 2;
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, cost });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        id
    }

    fn initial_potentials(&self, source: usize) -> Result<Vec<f64>> {
        let mut pot = vec![f64::INFINITY; self.n];
        pot[source] = 0.0;
        for round in 0..=self.n {
            let mut changed = false;
            for u in 0..self.n {
                if !pot[u].is_finite() {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && pot[u] + arc.cost < pot[arc.to] - 1e-12 {
                        pot[arc.to] = pot[u] + arc.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(pot);
            }
            if round == self.n {
                break;
            }
        }
        Err(Error::Domain("flow network has a negative-cost cycle".into()))
    }

    /// Sends exactly `required` units from `source` to `sink` at minimum cost.
    pub fn min_cost_flow(&self, source: usize, sink: usize, required: i64) -> Result<FlowSolution> {
        let mut arcs = self.arcs.clone();
        let mut pot = self.initial_potentials(source)?;
        for p in pot.iter_mut() {
            if !p.is_finite() {
                *p = 0.0;
            }
        }
        let mut sent = 0i64;
        let mut dist = vec![f64::INFINITY; self.n];
        let mut prev = vec![usize::MAX; self.n];
        while sent < required {
            dist.fill(f64::INFINITY);
            prev.fill(usize::MAX);
            dist[source] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Item(0.0, source));
            while let Some(Item(d, u)) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &arcs[a];
                    if arc.cap <= 0 {
                        continue;
                    }
                    let rc = (arc.cost + pot[u] - pot[arc.to]).max(0.0);
                    let nd = d + rc;
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        prev[arc.to] = a;
                        heap.push(Item(nd, arc.to));
                    }
                }
            }
            if !dist[sink].is_finite() {
                return Err(Error::Infeasible(format!(
                    "only {sent} of {required} flow units can be routed"
                )));
            }
            for v in 0..self.n {
                if dist[v].is_finite() {
                    pot[v] += dist[v];
                }
            }
            let mut push = required - sent;
            let mut v = sink;
            while v != source {
                let a = prev[v];
                push = push.min(arcs[a].cap);
                v = arcs[a ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let a = prev[v];
                arcs[a].cap -= push;
                arcs[a ^ 1].cap += push;
                v = arcs[a ^ 1].to;
            }
            sent += push;
        }
        let flow: Vec<i64> = (0..self.arcs.len() / 2).map(|e| arcs[2 * e + 1].cap).collect();
        let cost = flow
            .iter()
            .enumerate()
            .map(|(e, &f)| f as f64 * self.arcs[2 * e].cost)
            .sum();
        Ok(FlowSolution { flow, value: sent, cost })
    }
}

/// Assigns `n_clients` unit demands to facilities with integral capacities `caps`,
/// minimizing `Σ cost(i, j)`. Returns the total cost and each client's facility index
/// (an index into `caps`).
pub fn min_cost_assignment(
    caps: &[i64],
    n_clients: usize,
    cost: impl Fn(usize, usize) -> f64,
) -> Result<(f64, Vec<usize>)> {
    let nf = caps.len();
    let source = nf + n_clients;
    let sink = source + 1;
    let mut g = FlowNetwork::new(nf + n_clients + 2);
    for (i, &cap) in caps.iter().enumerate() {
        g.add_edge(source, i, cap.max(0), 0.0);
    }
    let mut pair = Vec::with_capacity(nf * n_clients);
    for i in 0..nf {
        for j in 0..n_clients {
            pair.push((g.add_edge(i, nf + j, 1, cost(i, j)), i, j));
        }
    }
    for j in 0..n_clients {
        g.add_edge(nf + j, sink, 1, 0.0);
    }
    let sol = g.min_cost_flow(source, sink, n_clients as i64)?;
    let mut assign = vec![usize::MAX; n_clients];
    let mut total = 0.0;
    for &(e, i, j) in &pair {
        if sol.flow[e] > 0 {
            assign[j] = i;
            total += cost(i, j);
        }
    }
    Ok((total, assign))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefers_cheap_path() {
        let mut g = FlowNetwork::new(4);
        let a = g.add_edge(0, 1, 1, 1.0);
        let b = g.add_edge(0, 2, 2, 5.0);
        g.add_edge(1, 3, 2, 1.0);
        g.add_edge(2, 3, 2, 1.0);
        let sol = g.min_cost_flow(0, 3, 2).unwrap();
        assert_eq!(sol.flow[a], 1);
        assert_eq!(sol.flow[b], 1);
        assert!((sol.cost - 8.0).abs() < 1e-12);
    }

    #[test]
    fn reroutes_through_residual() {
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, 1, 1.0);
        g.add_edge(0, 2, 1, 2.0);
        g.add_edge(1, 2, 1, 0.0);
        g.add_edge(1, 3, 1, 3.0);
        g.add_edge(2, 3, 1, 1.0);
        let sol = g.min_cost_flow(0, 3, 2).unwrap();
        assert!((sol.cost - 7.0).abs() < 1e-12, "{}", sol.cost);
    }

    #[test]
    fn single_arc() {
        let mut g = FlowNetwork::new(2);
        let e = g.add_edge(0, 1, 3, 2.0);
        let sol = g.min_cost_flow(0, 1, 3).unwrap();
        assert_eq!(sol.flow[e], 3);
        assert_eq!(sol.cost, 6.0);
    }

    #[test]
    fn identity_matching() {
        let c = [[0.0, 5.0], [5.0, 0.0]];
        let (cost, assign) = min_cost_assignment(&[1, 1], 2, |i, j| c[i][j]).unwrap();
        assert_eq!(cost, 0.0);
        assert_eq!(assign, vec![0, 1]);
    }

    #[test]
    fn insufficient_capacity() {
        let mut g = FlowNetwork::new(2);
        g.add_edge(0, 1, 1, 0.0);
        assert!(matches!(g.min_cost_flow(0, 1, 2), Err(Error::Infeasible(_))));
    }
}
