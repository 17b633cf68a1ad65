//! `CAPKM v1` line-oriented text format.
//!
//! ```text
//! CAPKM v1
//! problem ckm
//! facilities 2
//! clients 3
//! capacity 2
//! budget 2
//! fcost 1 1
//! metric euclidean 1
//! 0
//! 10
//! 0
//! 1
//! 10
//! ```
//!
//! `#` starts a comment. `metric matrix` is followed by `n + m` rows of the full matrix.
//! Numbers are written with the shortest representation that parses back to the same `f64`,
//! so saving and reloading is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Geometry, Instance, Problem, SideConstraint};
use crate::{Error, Result};

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_instance(inst))?;
    Ok(())
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "CAPKM v1")) => {}
        Some((n, other)) => return Err(Error::parse(n, format!("expected `CAPKM v1`, found `{other}`"))),
        None => return Err(Error::parse(0, "empty file")),
    }

    let mut problem = None;
    let mut n_fac = None;
    let mut n_cli = None;
    let mut capacity = None;
    let mut budget = None;
    let mut k = None;
    let mut fcost: Option<Vec<f64>> = None;

    let (metric_line, metric_kind, dim) = loop {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing `metric` section"))?;
        let mut tok = line.split_whitespace();
        let key = tok.next().unwrap_or("");
        let rest: Vec<&str> = tok.collect();
        let one = |rest: &[&str]| -> Result<String> {
            match rest {
                [v] => Ok((*v).to_string()),
                _ => Err(Error::parse(n, format!("`{key}` takes exactly one value"))),
            }
        };
        match key {
            "problem" => problem = Some(one(&rest)?.parse::<Problem>().map_err(|e| Error::parse(n, e.to_string()))?),
            "facilities" => n_fac = Some(parse_num::<usize>(n, &one(&rest)?)?),
            "clients" => n_cli = Some(parse_num::<usize>(n, &one(&rest)?)?),
            "capacity" => {
                let raw = one(&rest)?;
                if raw.starts_with('-') {
                    return Err(Error::InvalidInstance(format!("negative capacity {raw}")));
                }
                capacity = Some(parse_num::<u64>(n, &raw)?)
            }
            "budget" => budget = Some(parse_num::<f64>(n, &one(&rest)?)?),
            "k" => k = Some(parse_num::<usize>(n, &one(&rest)?)?),
            "fcost" => {
                let v = rest
                    .iter()
                    .map(|t| parse_num::<f64>(n, t))
                    .collect::<Result<Vec<_>>>()?;
                fcost = Some(v);
            }
            "metric" => match rest.as_slice() {
                ["euclidean", d] => break (n, "euclidean", parse_num::<usize>(n, d)?),
                ["matrix"] => break (n, "matrix", 0),
                _ => return Err(Error::parse(n, "expected `metric euclidean <d>` or `metric matrix`")),
            },
            other => return Err(Error::parse(n, format!("unknown key `{other}`"))),
        }
    };

    let need = |v: Option<usize>, what: &str| v.ok_or_else(|| Error::parse(metric_line, format!("missing `{what}`")));
    let problem = problem.ok_or_else(|| Error::parse(metric_line, "missing `problem`"))?;
    let n_fac = need(n_fac, "facilities")?;
    let n_cli = need(n_cli, "clients")?;
    let capacity = capacity.ok_or_else(|| Error::parse(metric_line, "missing `capacity`"))?;
    let fcost = fcost.ok_or_else(|| Error::parse(metric_line, "missing `fcost`"))?;
    if fcost.len() != n_fac {
        return Err(Error::parse(
            metric_line,
            format!("`fcost` lists {} values for {n_fac} facilities", fcost.len()),
        ));
    }
    let side = match (problem, budget, k) {
        (Problem::Ckm, Some(b), None) => SideConstraint::Budget(b),
        (Problem::Ckflp, None, Some(k)) => SideConstraint::Cardinality(k),
        (Problem::Cflp, None, None) => SideConstraint::None,
        (Problem::Ckm, _, _) => return Err(Error::parse(metric_line, "ckm needs `budget` and no `k`")),
        (Problem::Ckflp, _, _) => return Err(Error::parse(metric_line, "ckflp needs `k` and no `budget`")),
        (Problem::Cflp, _, _) => return Err(Error::parse(metric_line, "cflp takes neither `budget` nor `k`")),
    };

    let np = n_fac + n_cli;
    let width = if metric_kind == "euclidean" { dim } else { np };
    let mut rows = Vec::with_capacity(np);
    for _ in 0..np {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(metric_line, format!("expected {np} metric rows")))?;
        let row = line
            .split_whitespace()
            .map(|t| parse_num::<f64>(n, t))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(Error::parse(n, format!("expected {width} values, found {}", row.len())));
        }
        rows.push(row);
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "trailing content after metric rows"));
    }

    if metric_kind == "euclidean" {
        let inst = Instance::from_coords(problem, fcost, n_cli, capacity, side, dim, rows)?;
        inst.validate_metric()?;
        Ok(inst)
    } else {
        Instance::from_matrix(problem, fcost, n_cli, capacity, side, rows)
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse::<T>()
        .map_err(|_| Error::parse(line, format!("cannot parse `{tok}`")))
}

fn join(vals: impl IntoIterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in vals.into_iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "CAPKM v1").unwrap();
    writeln!(out, "problem {}", inst.problem()).unwrap();
    writeln!(out, "facilities {}", inst.n_facilities()).unwrap();
    writeln!(out, "clients {}", inst.n_clients()).unwrap();
    writeln!(out, "capacity {}", inst.capacity()).unwrap();
    if let Some(b) = inst.budget() {
        writeln!(out, "budget {b}").unwrap();
    }
    if let Some(k) = inst.k() {
        writeln!(out, "k {k}").unwrap();
    }
    writeln!(out, "fcost {}", join(inst.fcosts().iter().copied())).unwrap();
    match inst.geometry() {
        Geometry::Euclidean { dim, coords } => {
            writeln!(out, "metric euclidean {dim}").unwrap();
            for p in coords {
                writeln!(out, "{}", join(p.iter().copied())).unwrap();
            }
        }
        Geometry::Matrix => {
            writeln!(out, "metric matrix").unwrap();
            let np = inst.n_points();
            for p in 0..np {
                writeln!(out, "{}", join((0..np).map(|q| inst.point_dist(p, q)))).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY_A: &str = "CAPKM v1\n# two facilities on a line\nproblem ckm\nfacilities 2\nclients 3\ncapacity 2\nbudget 2\nfcost 1 1\nmetric euclidean 1\n0\n10\n0\n1\n10\n";

    #[test]
    fn parses_tiny_a() {
        let inst = parse_instance(TINY_A).unwrap();
        assert_eq!(inst.n_facilities(), 2);
        assert_eq!(inst.n_clients(), 3);
        assert_eq!(inst.budget(), Some(2.0));
        assert_eq!(inst.c(0, 1), 1.0);
        assert_eq!(write_instance(&inst), TINY_A.replace("# two facilities on a line\n", ""));
    }

    #[test]
    fn degenerate_single_point() {
        let text = "CAPKM v1\nproblem ckm\nfacilities 1\nclients 1\ncapacity 1\nbudget 0\nfcost 0\nmetric euclidean 2\n3 4\n3 4\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.c(0, 0), 0.0);
    }

    #[test]
    fn symmetry_violation() {
        let text = "CAPKM v1\nproblem cflp\nfacilities 1\nclients 1\ncapacity 1\nfcost 1\nmetric matrix\n0 5\n4 0\n";
        assert!(matches!(parse_instance(text), Err(Error::Metric(_))));
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_instance("CAPKM v2\n"), Err(Error::Parse { .. })));
        let missing_budget = "CAPKM v1\nproblem ckm\nfacilities 1\nclients 1\ncapacity 1\nfcost 0\nmetric matrix\n0 1\n1 0\n";
        assert!(matches!(parse_instance(missing_budget), Err(Error::Parse { .. })));
        let short = "CAPKM v1\nproblem cflp\nfacilities 1\nclients 1\ncapacity 1\nfcost 0\nmetric matrix\n0 1\n";
        assert!(matches!(parse_instance(short), Err(Error::Parse { .. })));
        let neg_cap = "CAPKM v1\nproblem cflp\nfacilities 1\nclients 1\ncapacity -3\nfcost 0\nmetric matrix\n0 1\n1 0\n";
        assert!(matches!(parse_instance(neg_cap), Err(Error::InvalidInstance(_))));
        let neg_cost = "CAPKM v1\nproblem cflp\nfacilities 1\nclients 1\ncapacity 1\nfcost -2\nmetric matrix\n0 1\n1 0\n";
        assert!(matches!(parse_instance(neg_cost), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn matrix_round_trip() {
        let text = "CAPKM v1\nproblem ckflp\nfacilities 1\nclients 2\ncapacity 2\nk 1\nfcost 0.1\nmetric matrix\n0 0.30000000000000004 1\n0.30000000000000004 0 1\n1 1 0\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(write_instance(&inst), text);
    }
}
