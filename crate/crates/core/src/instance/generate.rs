use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, Problem, SideConstraint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Uniform points in a square, Euclidean distances.
    Euclidean,
    /// Every off-diagonal distance uniform in `[span/2, span]`; metric since any two
    /// distances sum to at least the third.
    UniformMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    Fixed(f64),
    /// Cost of the cheapest facilities whose total capacity covers every client.
    OptFeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub family: Family,
    pub problem: Problem,
    pub n_facilities: usize,
    pub n_clients: usize,
    pub coord_range: (f64, f64),
    /// Opening costs are integers drawn uniformly from this inclusive range.
    pub cost_range: (u32, u32),
    pub capacity: u64,
    pub budget: BudgetRule,
    /// Cardinality for ckflp; defaults to `ceil(m / u)`.
    pub k: Option<usize>,
    pub seed: u64,
}

impl GenParams {
    pub fn new(problem: Problem, n_facilities: usize, n_clients: usize, capacity: u64, seed: u64) -> Self {
        GenParams {
            family: Family::Euclidean,
            problem,
            n_facilities,
            n_clients,
            coord_range: (0.0, 100.0),
            cost_range: (1, 20),
            capacity,
            budget: BudgetRule::OptFeasible,
            k: None,
            seed,
        }
    }
}

pub fn generate(params: &GenParams) -> Result<Instance> {
    let &GenParams {
        family,
        problem,
        n_facilities: n,
        n_clients: m,
        coord_range: (lo, hi),
        cost_range: (clo, chi),
        capacity: u,
        ..
    } = params;
    if n == 0 || m == 0 || u == 0 {
        return Err(Error::Domain("need at least one facility, one client and capacity >= 1".into()));
    }
    if !(lo < hi) || clo > chi {
        return Err(Error::Domain("empty coordinate or cost range".into()));
    }
    if (n as u64).saturating_mul(u) < m as u64 {
        return Err(Error::Infeasible(format!(
            "total capacity {} is below {m} clients",
            n as u64 * u
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let np = n + m;
    let points: Vec<Vec<f64>> = match family {
        Family::Euclidean => (0..np)
            .map(|_| vec![rng.gen_range(lo..hi), rng.gen_range(lo..hi)])
            .collect(),
        Family::UniformMatrix => {
            let span = hi - lo;
            let mut d = vec![vec![0.0; np]; np];
            for p in 0..np {
                for q in (p + 1)..np {
                    let v = rng.gen_range(span / 2.0..=span);
                    d[p][q] = v;
                    d[q][p] = v;
                }
            }
            d
        }
    };
    let fcost: Vec<f64> = (0..n).map(|_| rng.gen_range(clo..=chi) as f64).collect();

    let cover = m.div_ceil(u as usize);
    let side = match problem {
        Problem::Ckm => SideConstraint::Budget(match params.budget {
            BudgetRule::Fixed(b) => b,
            BudgetRule::OptFeasible => {
                let mut sorted = fcost.clone();
                sorted.sort_by(f64::total_cmp);
                sorted[..cover].iter().sum()
            }
        }),
        Problem::Ckflp => SideConstraint::Cardinality(params.k.unwrap_or(cover)),
        Problem::Cflp => SideConstraint::None,
    };

    match family {
        Family::Euclidean => Instance::from_coords(problem, fcost, m, u, side, 2, points),
        Family::UniformMatrix => Instance::from_matrix(problem, fcost, m, u, side, points),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::write_instance;

    #[test]
    fn single_point_pair() {
        let inst = generate(&GenParams::new(Problem::Ckm, 1, 1, 1, 7)).unwrap();
        assert_eq!(inst.n_points(), 2);
        assert_eq!(inst.n_clients(), 1);
    }

    #[test]
    fn deterministic_bytes() {
        let p = GenParams::new(Problem::Ckm, 8, 15, 3, 42);
        assert_eq!(write_instance(&generate(&p).unwrap()), write_instance(&generate(&p).unwrap()));
    }

    #[test]
    fn insufficient_capacity() {
        let err = generate(&GenParams::new(Problem::Ckm, 4, 20, 4, 1)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }

    #[test]
    fn opt_feasible_budget_covers_clients() {
        let inst = generate(&GenParams::new(Problem::Ckm, 6, 10, 4, 3)).unwrap();
        let mut costs = inst.fcosts().to_vec();
        costs.sort_by(f64::total_cmp);
        assert_eq!(inst.budget(), Some(costs[..3].iter().sum()));
    }

    #[test]
    fn uniform_matrix_is_metric() {
        let mut p = GenParams::new(Problem::Cflp, 5, 9, 2, 11);
        p.family = Family::UniformMatrix;
        generate(&p).unwrap().validate_metric().unwrap();
    }
}
