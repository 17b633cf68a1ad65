//! Instance data model: facilities with opening costs, unit-demand clients, a metric
//! over all points, one uniform capacity, and the problem-specific side constraint.
//!
//! Points are indexed facilities first (`0..n`), then clients (`n..n+m`).

mod format;
mod generate;

pub use format::{load_instance, parse_instance, save_instance, write_instance};
pub use generate::{generate, BudgetRule, Family, GenParams};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, BOUND_TOL};

/// Problem family an instance is posed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Capacitated knapsack median: connection cost only, facility costs bounded by a budget.
    Ckm,
    /// Capacitated facility location: facility plus connection cost, no side constraint.
    Cflp,
    /// Capacitated k-facility location: facility plus connection cost, at most `k` open.
    Ckflp,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Ckm => "ckm",
            Problem::Cflp => "cflp",
            Problem::Ckflp => "ckflp",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ckm" => Ok(Problem::Ckm),
            "cflp" => Ok(Problem::Cflp),
            "ckflp" => Ok(Problem::Ckflp),
            other => Err(Error::Domain(format!("unknown problem `{other}`"))),
        }
    }
}

/// How the distances were specified; kept so that saving reproduces the input.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Coordinates per point (facilities first); distances are Euclidean.
    Euclidean { dim: usize, coords: Vec<Vec<f64>> },
    /// Explicit full distance matrix.
    Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    problem: Problem,
    fcost: Vec<f64>,
    n_clients: usize,
    capacity: u64,
    budget: Option<f64>,
    k: Option<usize>,
    geometry: Geometry,
    dist: Vec<f64>,
}

impl Instance {
    /// Builds an instance from an explicit distance matrix over `n + m` points.
    pub fn from_matrix(
        problem: Problem,
        fcost: Vec<f64>,
        n_clients: usize,
        capacity: u64,
        side: SideConstraint,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let np = fcost.len() + n_clients;
        if matrix.len() != np || matrix.iter().any(|r| r.len() != np) {
            return Err(Error::InvalidInstance(format!(
                "distance matrix must be {np}x{np}"
            )));
        }
        let dist = matrix.into_iter().flatten().collect();
        let inst = Self::assemble(problem, fcost, n_clients, capacity, side, Geometry::Matrix, dist)?;
        inst.validate_metric()?;
        Ok(inst)
    }

    /// Builds an instance from point coordinates (facilities first).
    ///
    /// Euclidean distances are closed under shortest paths to a floating-point fixpoint so
    /// that every triangle inequality holds exactly as evaluated in `f64`.
    pub fn from_coords(
        problem: Problem,
        fcost: Vec<f64>,
        n_clients: usize,
        capacity: u64,
        side: SideConstraint,
        dim: usize,
        coords: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let np = fcost.len() + n_clients;
        if coords.len() != np || coords.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidInstance(format!(
                "expected {np} points of dimension {dim}"
            )));
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("non-finite coordinate".into()));
        }
        let mut dist = vec![0.0; np * np];
        for p in 0..np {
            for q in (p + 1)..np {
                let d = coords[p]
                    .iter()
                    .zip(&coords[q])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[p * np + q] = d;
                dist[q * np + p] = d;
            }
        }
        close_metric(&mut dist, np);
        Self::assemble(
            problem,
            fcost,
            n_clients,
            capacity,
            side,
            Geometry::Euclidean { dim, coords },
            dist,
        )
    }

    fn assemble(
        problem: Problem,
        fcost: Vec<f64>,
        n_clients: usize,
        capacity: u64,
        side: SideConstraint,
        geometry: Geometry,
        dist: Vec<f64>,
    ) -> Result<Self> {
        if fcost.is_empty() {
            return Err(Error::InvalidInstance("no facilities".into()));
        }
        if n_clients == 0 {
            return Err(Error::InvalidInstance("no clients".into()));
        }
        if capacity == 0 {
            return Err(Error::InvalidInstance("capacity must be positive".into()));
        }
        if let Some(i) = fcost.iter().position(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::InvalidInstance(format!(
                "facility {i} has invalid opening cost {}",
                fcost[i]
            )));
        }
        let (budget, k) = match (problem, side) {
            (Problem::Ckm, SideConstraint::Budget(b)) => {
                if !b.is_finite() || b < 0.0 {
                    return Err(Error::InvalidInstance(format!("invalid budget {b}")));
                }
                (Some(b), None)
            }
            (Problem::Ckflp, SideConstraint::Cardinality(k)) => {
                if k == 0 {
                    return Err(Error::InvalidInstance("k must be at least 1".into()));
                }
                (None, Some(k))
            }
            (Problem::Cflp, SideConstraint::None) => (None, None),
            (p, s) => {
                return Err(Error::InvalidInstance(format!(
                    "side constraint {s:?} does not match problem {p}"
                )))
            }
        };
        Ok(Instance {
            problem,
            fcost,
            n_clients,
            capacity,
            budget,
            k,
            geometry,
            dist,
        })
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn n_facilities(&self) -> usize {
        self.fcost.len()
    }

    pub fn n_clients(&self) -> usize {
        self.n_clients
    }

    pub fn n_points(&self) -> usize {
        self.fcost.len() + self.n_clients
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn u(&self) -> f64 {
        self.capacity as f64
    }

    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn fcost(&self, i: usize) -> f64 {
        self.fcost[i]
    }

    pub fn fcosts(&self) -> &[f64] {
        &self.fcost
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Distance between two raw point indices.
    #[inline]
    pub fn point_dist(&self, p: usize, q: usize) -> f64 {
        self.dist[p * self.n_points() + q]
    }

    /// Facility `i` to client `j`.
    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.point_dist(i, self.fcost.len() + j)
    }

    /// Client `a` to client `b`.
    #[inline]
    pub fn cc(&self, a: usize, b: usize) -> f64 {
        let n = self.fcost.len();
        self.point_dist(n + a, n + b)
    }

    /// Same instance posed as a different problem.
    pub fn with_side(&self, problem: Problem, side: SideConstraint) -> Result<Self> {
        Self::assemble(
            problem,
            self.fcost.clone(),
            self.n_clients,
            self.capacity,
            side,
            self.geometry.clone(),
            self.dist.clone(),
        )
    }

    /// Sub-instance keeping only the listed facilities (in the given order) and all clients.
    pub fn restrict_facilities(&self, keep: &[usize]) -> Instance {
        let n = self.n_facilities();
        let points: Vec<usize> = keep
            .iter()
            .copied()
            .chain(n..n + self.n_clients)
            .collect();
        let np = points.len();
        let mut dist = vec![0.0; np * np];
        for (a, &p) in points.iter().enumerate() {
            for (b, &q) in points.iter().enumerate() {
                dist[a * np + b] = self.point_dist(p, q);
            }
        }
        let geometry = match &self.geometry {
            Geometry::Euclidean { dim, coords } => Geometry::Euclidean {
                dim: *dim,
                coords: points.iter().map(|&p| coords[p].clone()).collect(),
            },
            Geometry::Matrix => Geometry::Matrix,
        };
        Instance {
            problem: self.problem,
            fcost: keep.iter().map(|&i| self.fcost[i]).collect(),
            n_clients: self.n_clients,
            capacity: self.capacity,
            budget: self.budget,
            k: self.k,
            geometry,
            dist,
        }
    }

    /// Checks zero diagonal, symmetry, non-negativity and the triangle inequality.
    ///
    /// Triangles are checked exhaustively up to 200 points, otherwise on `10 n^2`
    /// deterministically sampled triples.
    pub fn validate_metric(&self) -> Result<()> {
        let np = self.n_points();
        for p in 0..np {
            let d = self.point_dist(p, p);
            if d.abs() > BOUND_TOL {
                return Err(Error::Metric(format!("dist({p},{p}) = {d} is not zero")));
            }
            for q in 0..np {
                let a = self.point_dist(p, q);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::Metric(format!("dist({p},{q}) = {a} is invalid")));
                }
                let b = self.point_dist(q, p);
                if (a - b).abs() > BOUND_TOL {
                    return Err(Error::Metric(format!(
                        "asymmetric: dist({p},{q}) = {a} but dist({q},{p}) = {b}"
                    )));
                }
            }
        }
        let violated = |p: usize, q: usize, r: usize| {
            self.point_dist(p, q) > self.point_dist(p, r) + self.point_dist(r, q) + BOUND_TOL
        };
        let report = |p: usize, q: usize, r: usize| {
            Error::Metric(format!(
                "triangle inequality broken: dist({p},{q}) = {} > dist({p},{r}) + dist({r},{q}) = {}",
                self.point_dist(p, q),
                self.point_dist(p, r) + self.point_dist(r, q)
            ))
        };
        if np <= 200 {
            for p in 0..np {
                for q in (p + 1)..np {
                    for r in 0..np {
                        if violated(p, q, r) {
                            return Err(report(p, q, r));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..10 * np * np {
                let (p, q, r) = (rng.gen_range(0..np), rng.gen_range(0..np), rng.gen_range(0..np));
                if violated(p, q, r) {
                    return Err(report(p, q, r));
                }
            }
        }
        Ok(())
    }

    /// Facilities ordered by distance to client `j`, ties by facility id.
    pub fn facilities_by_distance(&self, j: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_facilities()).collect();
        order.sort_by(|&a, &b| cmp_dist(self.c(a, j), a, self.c(b, j), b));
        order
    }
}

/// Side constraint attached to the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideConstraint {
    Budget(f64),
    Cardinality(usize),
    None,
}

/// Orders `(distance, id)` pairs: distance first, then the smaller id wins ties.
#[inline]
pub fn cmp_dist(da: f64, a: usize, db: f64, b: usize) -> Ordering {
    da.total_cmp(&db).then(a.cmp(&b))
}

/// Shortest-path closure iterated until no entry changes, so that
/// `d[p][q] <= d[p][r] + d[r][q]` holds for every triple as computed.
fn close_metric(dist: &mut [f64], np: usize) {
    loop {
        let mut changed = false;
        for r in 0..np {
            for p in 0..np {
                let dpr = dist[p * np + r];
                for q in 0..np {
                    let via = dpr + dist[r * np + q];
                    if via < dist[p * np + q] {
                        dist[p * np + q] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_a() -> Instance {
        let coords = [0.0, 10.0, 0.0, 1.0, 10.0].iter().map(|&x| vec![x]).collect();
        Instance::from_coords(Problem::Ckm, vec![1.0, 1.0], 3, 2, SideConstraint::Budget(2.0), 1, coords)
            .unwrap()
    }

    #[test]
    fn tiny_a_distances() {
        let inst = tiny_a();
        assert_eq!(inst.c(0, 1), 1.0);
        assert_eq!(inst.c(1, 2), 0.0);
        assert_eq!(inst.cc(0, 2), 10.0);
        inst.validate_metric().unwrap();
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = vec![vec![0.0, 5.0], vec![4.0, 0.0]];
        let err = Instance::from_matrix(Problem::Cflp, vec![1.0], 1, 1, SideConstraint::None, m).unwrap_err();
        assert!(matches!(err, Error::Metric(ref s) if s.contains("asymmetric")), "{err}");
    }

    #[test]
    fn triangle_violation_rejected() {
        let m = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        let err = Instance::from_matrix(Problem::Cflp, vec![1.0], 2, 1, SideConstraint::None, m).unwrap_err();
        assert!(matches!(err, Error::Metric(ref s) if s.contains("triangle")), "{err}");
    }

    #[test]
    fn negative_cost_rejected() {
        let m = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let err = Instance::from_matrix(Problem::Cflp, vec![-1.0], 1, 1, SideConstraint::None, m).unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)));
    }

    #[test]
    fn restriction_keeps_distances() {
        let inst = tiny_a();
        let sub = inst.restrict_facilities(&[1]);
        assert_eq!(sub.n_facilities(), 1);
        assert_eq!(sub.c(0, 0), 10.0);
        assert_eq!(sub.fcost(0), 1.0);
    }

    #[test]
    fn tie_order_prefers_smaller_id() {
        assert_eq!(cmp_dist(1.0, 3, 1.0, 2), Ordering::Greater);
        assert_eq!(cmp_dist(0.5, 3, 1.0, 2), Ordering::Less);
    }
}
