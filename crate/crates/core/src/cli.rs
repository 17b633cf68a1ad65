//! Command-line front end. `run` is the whole program minus process exit, so it can be
//! driven from tests with in-memory output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cflp::{solve_cflp, CFLP_L};
use crate::ckflp::solve_ckflp;
use crate::ckm::{solve_ckm, solve_natural_lp, AssignMode, Solution};
use crate::clustering::build_clusters;
use crate::hierarchy::build_hierarchy;
use crate::instance::{generate, load_instance, write_instance, BudgetRule, Family, GenParams, Instance, Problem};
use crate::oracle::{exact_cflp, exact_ckflp, exact_ckm, MAX_ORACLE_FACILITIES};
use crate::report::{le_tol, write_json, write_metrics, MetricsRow};
use crate::{l_from_eps, Error, Result};

/// Environment variable that replaces the default seed of `gen` and `bench`.
pub const SEED_ENV: &str = "CAPROUND_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FALSIFIED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "capround", version, about = "LP rounding for capacitated clustering and facility location")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Round one instance and print its metrics row.
    Solve(SolveArgs),
    /// Write a random instance.
    Gen(GenArgs),
    /// Solve an instance exactly by enumeration.
    Oracle(OracleArgs),
    /// Solve a grid of random instances and print one metrics row each.
    Bench(BenchArgs),
    /// Dump the clustering of an instance as CSV (and the center hierarchy as DOT).
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Ckm,
    Cflp,
    Ckflp,
}

impl From<ProblemArg> for Problem {
    fn from(p: ProblemArg) -> Problem {
        match p {
            ProblemArg::Ckm => Problem::Ckm,
            ProblemArg::Cflp => Problem::Cflp,
            ProblemArg::Ckflp => Problem::Ckflp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AssignArg {
    Fractional,
    Integral,
}

impl From<AssignArg> for AssignMode {
    fn from(a: AssignArg) -> AssignMode {
        match a {
            AssignArg::Fractional => AssignMode::Fractional,
            AssignArg::Integral => AssignMode::Integral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Euclidean,
    Matrix,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    input: PathBuf,
    /// Facility limit; required for ckflp.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "fractional")]
    assign: AssignArg,
    /// Metrics CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Also solve exactly and fill the `opt` column.
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long = "facilities", short = 'n')]
    n: usize,
    #[arg(long = "clients", short = 'm')]
    m: usize,
    #[arg(long = "capacity", short = 'u')]
    u: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "euclidean")]
    family: FamilyArg,
    /// Fixed budget (ckm); defaults to the cost of the cheapest covering facilities.
    #[arg(long)]
    budget: Option<f64>,
    /// Facility limit (ckflp); defaults to ceil(m / u).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    cost_min: u32,
    #[arg(long, default_value_t = 20)]
    cost_max: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    /// Problem to solve; defaults to the one declared by the instance.
    #[arg(long, value_enum)]
    problem: Option<ProblemArg>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Comma-separated slack values.
    #[arg(long, value_delimiter = ',', required = true)]
    eps_list: Vec<f64>,
    /// Number of random instances per size.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Comma-separated sizes `NxM` or `NxM:U` (facilities x clients, capacity).
    #[arg(long, value_delimiter = ',', default_value = "6x12")]
    sizes: Vec<String>,
    /// First seed; instance `s` of a size uses `seed + s`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "fractional")]
    assign: AssignArg,
    #[arg(long, value_enum, default_value = "euclidean")]
    family: FamilyArg,
    /// Skip the exact solver even where it would run.
    #[arg(long)]
    no_oracle: bool,
    /// Largest facility count handed to the exact solver.
    #[arg(long, default_value_t = 10)]
    oracle_limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Facility limit for ckflp; defaults to the instance's.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the center hierarchy as Graphviz DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

/// Runs the program on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_ERROR
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout, stderr),
        Command::Report(a) => cmd_report(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Falsified { .. }) => {
            let _ = writeln!(stderr, "capround: {e}");
            EXIT_FALSIFIED
        }
        Err(e) => {
            let _ = writeln!(stderr, "capround: {e}");
            EXIT_ERROR
        }
    }
}

fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

/// Writes to `path`, or to `stdout` when no path is given.
fn with_output(path: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn solve_one(inst: &Instance, problem: Problem, eps: f64, k: Option<usize>, assign: AssignMode) -> Result<Solution> {
    match problem {
        Problem::Ckm => solve_ckm(inst, eps, assign),
        Problem::Cflp => solve_cflp(inst, eps, assign),
        Problem::Ckflp => {
            let k = k.ok_or_else(|| Error::Domain("ckflp needs --k".into()))?;
            solve_ckflp(inst, k, eps, assign)
        }
    }
}

fn oracle_cost(inst: &Instance, problem: Problem, k: Option<usize>) -> Result<f64> {
    let s = match problem {
        Problem::Ckm => exact_ckm(inst)?,
        Problem::Cflp => exact_cflp(inst)?,
        Problem::Ckflp => {
            let k = k
                .or(inst.k())
                .ok_or_else(|| Error::Domain("ckflp needs --k".into()))?;
            exact_ckflp(inst, k)?
        }
    };
    Ok(s.cost)
}

fn verdict(sol: &Solution) -> i32 {
    if sol.ok_budget && sol.ok_capacity && sol.ok_cost {
        EXIT_OK
    } else {
        EXIT_FALSIFIED
    }
}

fn cmd_solve(a: SolveArgs, stdout: &mut dyn Write) -> Result<i32> {
    let problem = Problem::from(a.problem);
    if problem == Problem::Ckflp && a.k.is_none() {
        return Err(Error::Domain("ckflp needs --k".into()));
    }
    let inst = load_instance(&a.input)?;
    let sol = solve_one(&inst, problem, a.eps, a.k, a.assign.into())?;
    let opt = if a.oracle {
        Some(oracle_cost(&inst, problem, a.k)?)
    } else {
        None
    };
    let row = MetricsRow::new(&instance_name(&a.input), &sol, opt);
    with_output(a.out.as_deref(), stdout, |w| write_metrics(w, &[row], true))?;
    if let Some(p) = &a.manifest {
        let mut w = BufWriter::new(File::create(p)?);
        write_json(&mut w, &sol.manifest)?;
        w.flush()?;
    }
    Ok(verdict(&sol))
}

fn gen_params(problem: Problem, family: FamilyArg, n: usize, m: usize, u: u64, seed: u64) -> GenParams {
    let mut p = GenParams::new(problem, n, m, u, seed);
    p.family = match family {
        FamilyArg::Euclidean => Family::Euclidean,
        FamilyArg::Matrix => Family::UniformMatrix,
    };
    p
}

fn cmd_gen(a: GenArgs, stdout: &mut dyn Write) -> Result<i32> {
    let seed = match a.seed {
        Some(s) => s,
        None => default_seed()?,
    };
    let mut p = gen_params(a.problem.into(), a.family, a.n, a.m, a.u, seed);
    p.cost_range = (a.cost_min, a.cost_max);
    if let Some(b) = a.budget {
        p.budget = BudgetRule::Fixed(b);
    }
    p.k = a.k;
    let inst = generate(&p)?;
    let text = write_instance(&inst);
    with_output(a.out.as_deref(), stdout, |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(EXIT_OK)
}

fn cmd_oracle(a: OracleArgs, stdout: &mut dyn Write) -> Result<i32> {
    let inst = load_instance(&a.input)?;
    let problem = a.problem.map(Problem::from).unwrap_or(inst.problem());
    let s = match problem {
        Problem::Ckm => exact_ckm(&inst)?,
        Problem::Cflp => exact_cflp(&inst)?,
        Problem::Ckflp => {
            let k = a
                .k
                .or(inst.k())
                .ok_or_else(|| Error::Domain("ckflp needs --k".into()))?;
            exact_ckflp(&inst, k)?
        }
    };
    write_json(stdout, &s)?;
    Ok(EXIT_OK)
}

/// Parses `NxM` or `NxM:U`; the capacity defaults to `ceil(M/N) + 1`.
fn parse_size(s: &str) -> Result<(usize, usize, u64)> {
    let bad = || Error::Domain(format!("size {s:?} is not NxM or NxM:U"));
    let (dims, cap) = match s.split_once(':') {
        Some((d, c)) => (d, Some(c.trim().parse::<u64>().map_err(|_| bad())?)),
        None => (s, None),
    };
    let (n, m) = dims.split_once('x').ok_or_else(bad)?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    let m: usize = m.trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    let u = cap.unwrap_or((m as u64).div_ceil(n as u64) + 1);
    Ok((n, m, u))
}

/// Runs every (size, seed, eps) cell sequentially. Rows whose rounded cost falls below the
/// oracle optimum are reported on `stderr`; the rounding may exceed capacity and budget, so
/// this is a diagnostic rather than a falsification.
fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let problem = Problem::from(a.problem);
    let base = match a.seed {
        Some(s) => s,
        None => default_seed()?,
    };
    let sizes: Vec<(usize, usize, u64)> = a.sizes.iter().map(|s| parse_size(s)).collect::<Result<_>>()?;
    let oracle_limit = a.oracle_limit.min(MAX_ORACLE_FACILITIES);
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for &(n, m, u) in &sizes {
        for s in 0..a.seeds {
            let seed = base + s;
            let inst = generate(&gen_params(problem, a.family, n, m, u, seed))?;
            let name = format!("{}-n{n}-m{m}-u{u}-s{seed}", problem.as_str());
            let opt = if !a.no_oracle && n <= oracle_limit {
                Some(oracle_cost(&inst, problem, inst.k())?)
            } else {
                None
            };
            for &eps in &a.eps_list {
                let sol = solve_one(&inst, problem, eps, inst.k(), a.assign.into())?;
                code = code.max(verdict(&sol));
                if let Some(o) = opt.filter(|&o| !le_tol(o, sol.cost)) {
                    writeln!(stderr, "below optimum: {name} eps {eps}: cost {} < OPT {o}", sol.cost)?;
                }
                rows.push(MetricsRow::new(&name, &sol, opt));
            }
        }
    }
    with_output(a.out.as_deref(), stdout, |w| write_metrics(w, &rows, true))?;
    Ok(code)
}

fn cmd_report(a: ReportArgs, stdout: &mut dyn Write) -> Result<i32> {
    let problem = Problem::from(a.problem);
    let mut inst = load_instance(&a.input)?;
    if problem == Problem::Ckflp {
        if let Some(k) = a.k {
            inst = inst.with_side(Problem::Ckflp, crate::instance::SideConstraint::Cardinality(k))?;
        }
    }
    let l = if problem == Problem::Cflp {
        CFLP_L
    } else {
        l_from_eps(a.eps)
    };
    let sol = solve_natural_lp(&inst, problem)?;
    let cs = build_clusters(&inst, &sol, l);
    let csv = cs.to_csv();
    with_output(a.out.as_deref(), stdout, |w| Ok(w.write_all(csv.as_bytes())?))?;
    if let Some(p) = &a.dot {
        let h = build_hierarchy(&inst, &cs, 4.0 / (l as f64 - 1.0));
        std::fs::write(p, h.to_dot(&cs))?;
    }
    Ok(EXIT_OK)
}
