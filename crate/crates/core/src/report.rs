//! Bound checks, metrics rows and run manifests.

use std::io::Write;

use serde::Serialize;

use crate::{Error, Result, BOUND_TOL};

/// One evaluated inequality `lhs <= rhs` (or a boolean property encoded as 0/1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    /// Fatal checks guard a guarantee of the output; advisory ones are diagnostics.
    pub fatal: bool,
    pub detail: String,
}

pub fn le_tol(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + BOUND_TOL * rhs.abs().max(1.0)
}

impl Check {
    pub fn le(name: &str, lhs: f64, rhs: f64, fatal: bool) -> Check {
        Check {
            name: name.to_string(),
            lhs,
            rhs,
            ok: le_tol(lhs, rhs),
            fatal,
            detail: String::new(),
        }
    }

    /// `lhs <= rhs` with no tolerance.
    pub fn le_exact(name: &str, lhs: f64, rhs: f64, fatal: bool) -> Check {
        Check {
            ok: lhs <= rhs,
            ..Check::le(name, lhs, rhs, fatal)
        }
    }

    pub fn holds(name: &str, ok: bool, fatal: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.to_string(),
            lhs: if ok { 0.0 } else { 1.0 },
            rhs: 0.0,
            ok,
            fatal,
            detail: detail.into(),
        }
    }

    /// Aggregates many instances of one inequality, keeping the one with the least slack.
    pub fn worst<I, W>(name: &str, fatal: bool, cases: I) -> Check
    where
        I: IntoIterator<Item = (f64, f64, W)>,
        W: std::fmt::Display,
    {
        let mut best: Option<(f64, f64, String, bool)> = None;
        let mut count = 0usize;
        let mut all_ok = true;
        for (lhs, rhs, w) in cases {
            count += 1;
            let ok = le_tol(lhs, rhs);
            all_ok &= ok;
            let gap = lhs - rhs;
            let replace = match &best {
                None => true,
                Some((bl, br, _, bok)) => (!ok && *bok) || (ok == *bok && gap > bl - br),
            };
            if replace {
                best = Some((lhs, rhs, w.to_string(), ok));
            }
        }
        match best {
            None => Check::holds(name, true, fatal, "vacuous"),
            Some((lhs, rhs, w, _)) => Check {
                name: name.to_string(),
                lhs,
                rhs,
                ok: all_ok,
                fatal,
                detail: format!("{count} cases; tightest at {w}"),
            },
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn push(&mut self, c: Check) {
        self.0.push(c);
    }

    pub fn extend(&mut self, other: Checks) {
        self.0.extend(other.0);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.0.iter().find(|c| c.name == name)
    }

    pub fn first_fatal_failure(&self) -> Option<&Check> {
        self.0.iter().find(|c| c.fatal && !c.ok)
    }

    pub fn all_ok(&self, name_prefix: &str) -> bool {
        self.0.iter().filter(|c| c.name.starts_with(name_prefix)).all(|c| c.ok)
    }

    /// Turns the first failed fatal check into a [`Error::Falsified`].
    pub fn into_result(self) -> Result<Checks> {
        match self.first_fatal_failure() {
            Some(c) => Err(Error::falsified(
                &c.name,
                format!("{} > {} ({})", c.lhs, c.rhs, c.detail),
            )),
            None => Ok(self),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Check> {
        self.0.iter()
    }
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    out.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuessRecord {
    pub f_max: f64,
    pub facilities: usize,
    pub status: String,
    pub connection_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaClusterRecord {
    pub id: usize,
    pub root_center: usize,
    pub members: Vec<usize>,
    pub parent: Option<usize>,
    pub gamma: usize,
    pub s2: usize,
    pub beta: usize,
    pub case: Option<String>,
}

/// Everything needed to reproduce and audit one solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Manifest {
    pub problem: String,
    pub eps: f64,
    pub l: usize,
    pub n_facilities: usize,
    pub n_clients: usize,
    pub capacity: u64,
    pub budget_or_k: f64,
    pub guesses: Vec<GuessRecord>,
    pub f_max: Option<f64>,
    pub lp_opt: f64,
    pub centers: Vec<usize>,
    pub dense_centers: Vec<usize>,
    pub meta_clusters: Vec<MetaClusterRecord>,
    pub fractional_per_iteration: Vec<usize>,
    pub open: Vec<usize>,
    pub cost: f64,
    pub connection_cost: f64,
    pub facility_cost: f64,
    pub max_load_over_u: f64,
    pub checks: Vec<Check>,
}

/// Column names of the metrics CSV, in order.
pub const METRICS_HEADER: [&str; 20] = [
    "instance",
    "problem",
    "eps",
    "l",
    "n_fac",
    "n_cli",
    "u",
    "budget_or_k",
    "lp_opt",
    "opt",
    "cost",
    "ratio_vs_lp",
    "budget_used",
    "fmax",
    "max_load_over_u",
    "frac_after_round",
    "alpha_l",
    "ok_budget",
    "ok_capacity",
    "ok_cost",
];

/// One row of the metrics CSV. Empty optional fields are written as empty cells.
///
/// For k-facility location `budget_or_k` holds `k` and `budget_used` the number of open
/// facilities; for facility location both hold the facility cost side (`0` and the paid
/// opening cost). `alpha_l` is the cost factor the run was checked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub instance: String,
    pub problem: String,
    pub eps: f64,
    pub l: usize,
    pub n_fac: usize,
    pub n_cli: usize,
    pub u: u64,
    pub budget_or_k: f64,
    pub lp_opt: f64,
    pub opt: Option<f64>,
    pub cost: f64,
    pub ratio_vs_lp: Option<f64>,
    pub budget_used: f64,
    pub fmax: Option<f64>,
    pub max_load_over_u: f64,
    pub frac_after_round: usize,
    pub alpha_l: f64,
    pub ok_budget: bool,
    pub ok_capacity: bool,
    pub ok_cost: bool,
}

impl MetricsRow {
    /// `ratio_vs_lp` is filled only alongside an oracle optimum, so rows beyond the oracle's
    /// reach leave both columns empty.
    pub fn new(instance: &str, sol: &crate::ckm::Solution, opt: Option<f64>) -> MetricsRow {
        let man = &sol.manifest;
        let budget_used = match sol.problem {
            crate::instance::Problem::Ckflp => sol.open.len() as f64,
            _ => sol.facility_cost,
        };
        MetricsRow {
            instance: instance.to_string(),
            problem: sol.problem.as_str().to_string(),
            eps: sol.eps,
            l: sol.l,
            n_fac: man.n_facilities,
            n_cli: man.n_clients,
            u: man.capacity,
            budget_or_k: man.budget_or_k,
            lp_opt: sol.lp_opt,
            opt,
            cost: sol.cost,
            ratio_vs_lp: opt.filter(|_| sol.lp_opt > 0.0).map(|_| sol.cost / sol.lp_opt),
            budget_used,
            fmax: sol.f_max,
            max_load_over_u: sol.max_load_over_u,
            frac_after_round: sol.frac_after_round,
            alpha_l: crate::cost_factor(sol.problem, sol.l, sol.eps),
            ok_budget: sol.ok_budget,
            ok_capacity: sol.ok_capacity,
            ok_cost: sol.ok_cost,
        }
    }
}

/// Writes `rows` as CSV, with the header line when `header` is set.
pub fn write_metrics(out: &mut dyn Write, rows: &[MetricsRow], header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    if header {
        w.write_record(METRICS_HEADER).map_err(to_io)?;
    }
    for r in rows {
        w.serialize(r).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}
