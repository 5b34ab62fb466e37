//! Command-line interface. Exit codes: `0` converged / success, `1` invalid
//! input or infeasible instance, `2` iteration cap reached.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::analysis::{self, Regime};
use crate::dynamics::{flow_field, integrate, iteration_budget, Grid, IntegratorConfig};
use crate::error::{Error, Result};
use crate::experiments::{self, CompareCell, SlopeRow};
use crate::format;
use crate::oracle;
use crate::output::{self, num, write_atomic};
use crate::problem::{fig1, ladder_family, DPolicy, PositiveLP, StateVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_STEP_LIMIT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "physarum",
    version,
    about = "Physarum dynamics for positive linear programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the dynamics, audit the Lyapunov function, write trajectory.csv.
    Solve(RunArgs),
    /// Vector field and trajectories of a two-variable instance.
    Flowfield(RunArgs),
    /// Convergence-time comparison of D = diag(c) and D = I on the ladder family.
    Compare(RunArgs),
    /// Predicted versus measured entry slope at the optimum (1, 0).
    Slope(RunArgs),
    /// Validate an instance.
    Validate(RunArgs),
    /// Solve an instance exactly by basic-solution enumeration.
    Oracle(RunArgs),
    /// Dynamics versus oracle on seeded random instances.
    Suite(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Fig1,
    Ladder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Uniform,
    DiagCost,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub d_policy: Option<PolicyArg>,
    /// Explicit reactivities, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub d: Option<Vec<f64>>,
    /// Costs for `slope`, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub c: Option<Vec<f64>>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, default_value = "physarum-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ladder parameter(s), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub f: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Number of random instances for `suite`.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Flowfield(a) => cmd_flowfield(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Slope(a) => cmd_slope(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Suite(a) => cmd_suite(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVALID
        }
    }
}

fn ladder_f(args: &RunArgs) -> u32 {
    args.f.first().copied().unwrap_or(10)
}

fn explicit_policy(args: &RunArgs) -> Option<DPolicy> {
    if let Some(d) = &args.d {
        return Some(DPolicy::Explicit(d.clone()));
    }
    args.d_policy.map(|p| match p {
        PolicyArg::Uniform => DPolicy::Uniform,
        PolicyArg::DiagCost => DPolicy::DiagCost,
    })
}

/// Loads the instance named by `--builtin` or `--problem` and applies the
/// reactivity flags.
pub fn load_problem(args: &RunArgs) -> Result<PositiveLP> {
    let lp = match (&args.builtin, &args.problem) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidProblem(
                "give either --builtin or --problem, not both".into(),
            ))
        }
        (Some(Builtin::Fig1), None) => fig1([1.0, 1.0]),
        (Some(Builtin::Ladder), None) => ladder_family(ladder_f(args))?,
        (None, Some(path)) => format::read_problem(path)?,
        (None, None) => {
            return Err(Error::InvalidProblem(
                "missing --builtin or --problem".into(),
            ))
        }
    };
    match explicit_policy(args) {
        Some(p) => lp.with_policy(&p),
        None => Ok(lp),
    }
}

fn out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn initial_state(args: &RunArgs, m: usize) -> Result<StateVector> {
    match &args.x0 {
        Some(x) if x.len() == m => StateVector::from_slice(x),
        Some(x) => Err(Error::Dimension(format!(
            "--x0 has {} entries, expected {m}",
            x.len()
        ))),
        None => StateVector::new(DVector::from_element(m, 1.0)),
    }
}

fn run_config(args: &RunArgs, lp: &PositiveLP) -> IntegratorConfig {
    let mut cfg = IntegratorConfig::for_problem(lp);
    if let Some(h) = args.h {
        cfg.h = h;
    }
    if let Some(eps) = args.epsilon {
        cfg.epsilon = eps;
    }
    cfg.max_steps = args.max_steps.unwrap_or_else(|| {
        iteration_budget(lp, cfg.h, cfg.epsilon) * experiments::SOLVE_BUDGET_MULTIPLE
    });
    cfg.with_record_every(args.record_every)
}

fn cmd_solve(args: &RunArgs) -> Result<i32> {
    let lp = load_problem(args)?;
    let x0 = initial_state(args, lp.m())?;
    let cfg = run_config(args, &lp);
    let report = match experiments::solve(&lp, &x0, &cfg) {
        Err(Error::Infeasible) => {
            println!("instance {} is infeasible", lp.name());
            return Ok(EXIT_INVALID);
        }
        other => other?,
    };
    out_dir(&args.out)?;
    let t = &report.trajectory;
    write_atomic(
        &args.out.join("trajectory.csv"),
        &output::trajectory_csv(t, report.audit.as_ref()),
    )?;
    let x = t.final_state();
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "instance: {} (n = {}, m = {})",
        lp.name(),
        lp.n(),
        lp.m()
    );
    let _ = writeln!(summary, "step size: {}", t.h);
    let status = if t.converged() {
        "converged"
    } else {
        "iteration cap reached"
    };
    let _ = writeln!(summary, "steps: {} ({status})", t.steps);
    let _ = writeln!(summary, "final c^T x: {}", num(lp.cost(x)));
    let _ = writeln!(summary, "final residual: {}", num(lp.residual_inf(x)));
    if let (Some(o), Some(gap)) = (&report.oracle, report.oracle_gap(&lp)) {
        let _ = writeln!(summary, "oracle optimum: {}", num(o.optimal_value));
        let _ = writeln!(summary, "oracle gap: {}", num(gap));
    }
    for w in &t.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    print!("{summary}");
    if let Some(audit) = &report.audit {
        write_atomic(&args.out.join("audit.txt"), &format!("{summary}{audit}"))?;
        print!("{audit}");
    }
    Ok(if t.converged() {
        EXIT_OK
    } else {
        EXIT_STEP_LIMIT
    })
}

fn is_two_arc_example(lp: &PositiveLP) -> bool {
    lp.n() == 1 && lp.m() == 2 && lp.a()[(0, 0)] == 1.0 && lp.a()[(0, 1)] == 1.0 && lp.b()[0] == 1.0
}

fn flowfield_one(lp: &PositiveLP, args: &RunArgs, dir: &Path) -> Result<()> {
    out_dir(dir)?;
    let grid = Grid {
        x1: (0.0, 1.2),
        x2: (0.0, 1.2),
        nx: 25,
        ny: 25,
    };
    write_atomic(
        &dir.join("field.csv"),
        &output::field_csv(&flow_field(lp, &grid)?),
    )?;
    let mut bundle = Vec::new();
    for start in experiments::FIG1_STARTS {
        let cfg = run_config(args, lp);
        bundle.push(integrate(
            lp,
            &StateVector::from_slice(&start)?,
            &cfg,
            None,
        )?);
    }
    write_atomic(&dir.join("trajectories.csv"), &output::bundle_csv(&bundle))?;
    if is_two_arc_example(lp) {
        let c = [lp.c()[0], lp.c()[1]];
        let d = [lp.d()[0], lp.d()[1]];
        if let Ok(pred) = analysis::predict_entry(c, d) {
            if let Some(slope) = pred.slope {
                write_atomic(
                    &dir.join("entry_line.csv"),
                    &output::entry_line_csv(slope, 0.5, 51),
                )?;
            }
            println!(
                "d = ({}, {}): {} entry{}",
                d[0],
                d[1],
                pred.regime.as_str(),
                pred.slope
                    .map(|s| format!(", slope {s}"))
                    .unwrap_or_default()
            );
        }
    }
    Ok(())
}

fn cmd_flowfield(args: &RunArgs) -> Result<i32> {
    let lp = load_problem(args)?;
    if lp.m() != 2 {
        return Err(Error::NotPlanar(lp.m()));
    }
    if explicit_policy(args).is_some() || args.builtin != Some(Builtin::Fig1) {
        flowfield_one(&lp, args, &args.out)?;
    } else {
        for d in experiments::FIG1_REACTIVITIES {
            let dir = args.out.join(format!("d_{}_{}", d[0], d[1]));
            flowfield_one(&lp.with_reactivity(d.to_vec())?, args, &dir)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn compare_csv(cells: &[CompareCell]) -> String {
    let mut out =
        String::from("f,policy,h,budget,steps_to_threshold,within_budget,cap,final_ctx,optimum\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.f,
            c.policy,
            num(c.h),
            c.budget,
            c.steps_to_threshold
                .map(|s| s.to_string())
                .unwrap_or_default(),
            c.within_budget(),
            c.cap,
            num(c.final_ctx),
            num(c.optimum)
        );
    }
    out
}

fn cmd_compare(args: &RunArgs) -> Result<i32> {
    let fs: Vec<u32> = if args.f.is_empty() {
        experiments::COMPARE_F.to_vec()
    } else {
        args.f.clone()
    };
    let epsilon = args.epsilon.unwrap_or(0.1);
    let mut cells = Vec::new();
    for &f in &fs {
        for policy in &experiments::COMPARE_POLICIES {
            let cell = experiments::compare_cell(f, policy, epsilon, args.max_steps)?;
            println!(
                "f = {:>4}  D = {:<9}  budget = {:>6}  steps = {}",
                cell.f,
                cell.policy,
                cell.budget,
                cell.steps_to_threshold
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| format!("> {}", cell.cap))
            );
            cells.push(cell);
        }
    }
    out_dir(&args.out)?;
    write_atomic(&args.out.join("compare.csv"), &compare_csv(&cells))?;
    Ok(EXIT_OK)
}

pub fn slope_csv(rows: &[SlopeRow]) -> String {
    let mut out = String::from(
        "c1,c2,d1,d2,predicted_slope,measured_slope,predicted_regime,measured_regime,exponent\n",
    );
    for r in rows {
        let measured = if r.measurement.regime == Regime::Sloped {
            num(r.measurement.slope)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(r.c[0]),
            num(r.c[1]),
            num(r.d[0]),
            num(r.d[1]),
            r.prediction.slope.map(num).unwrap_or_default(),
            measured,
            r.prediction.regime.as_str(),
            r.measurement.regime.as_str(),
            num(r.measurement.exponent)
        );
    }
    out
}

fn pair(v: &Option<Vec<f64>>, default: [f64; 2], flag: &str) -> Result<[f64; 2]> {
    match v {
        None => Ok(default),
        Some(v) if v.len() == 2 => Ok([v[0], v[1]]),
        Some(v) => Err(Error::Dimension(format!(
            "--{flag} needs 2 values, got {}",
            v.len()
        ))),
    }
}

fn cmd_slope(args: &RunArgs) -> Result<i32> {
    let c = pair(&args.c, [1.0, 2.0], "c")?;
    let x0 = pair(&args.x0, [0.3, 0.4], "x0")?;
    let settings: Vec<[f64; 2]> = match &args.d {
        Some(_) => vec![pair(&args.d, [1.0, 1.0], "d")?],
        None => experiments::FIG1_REACTIVITIES.to_vec(),
    };
    let mut rows = Vec::new();
    for d in settings {
        let row = experiments::slope_study(c, d, x0)?;
        println!(
            "c = ({}, {}), d = ({}, {}): predicted {}{}, measured {}{}",
            c[0],
            c[1],
            d[0],
            d[1],
            row.prediction.regime.as_str(),
            row.prediction
                .slope
                .map(|s| format!(" {s:.6}"))
                .unwrap_or_default(),
            row.measurement.regime.as_str(),
            if row.measurement.regime == Regime::Sloped {
                format!(" {:.6}", row.measurement.slope)
            } else {
                String::new()
            }
        );
        rows.push(row);
    }
    out_dir(&args.out)?;
    write_atomic(&args.out.join("slope.csv"), &slope_csv(&rows))?;
    Ok(EXIT_OK)
}

fn cmd_validate(args: &RunArgs) -> Result<i32> {
    let lp = load_problem(args)?;
    let r = lp.validate();
    println!(
        "instance: {} (n = {}, m = {}, rank {})",
        lp.name(),
        r.n,
        r.m,
        r.rank
    );
    for note in &r.notes {
        println!("note: {note}");
    }
    for p in &r.problems {
        println!("problem: {p}");
    }
    Ok(if r.is_valid() { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_oracle(args: &RunArgs) -> Result<i32> {
    let lp = load_problem(args)?;
    match oracle::solve_exhaustive(&lp) {
        Ok(o) => {
            println!("optimal value: {}", num(o.optimal_value));
            for v in &o.optimal_vertices {
                let coords: Vec<String> = v.iter().map(|&e| format!("{e}")).collect();
                println!("optimal vertex: ({})", coords.join(", "));
            }
            let support: Vec<String> = o.support.iter().map(|i| (i + 1).to_string()).collect();
            println!("optimal support I: {{{}}}", support.join(", "));
            Ok(EXIT_OK)
        }
        Err(Error::Infeasible) => {
            println!("instance {} is infeasible", lp.name());
            Ok(EXIT_INVALID)
        }
        Err(e) => Err(e),
    }
}

fn cmd_suite(args: &RunArgs) -> Result<i32> {
    let max_steps = args.max_steps.unwrap_or(200_000);
    let rows = experiments::oracle_suite(args.seed, args.count, max_steps)?;
    let mut csv =
        String::from("name,n,m,optimum,final_ctx,relative_error,residual_inf,steps,converged\n");
    let mut ok = true;
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.name,
            r.n,
            r.m,
            num(r.optimum),
            num(r.final_ctx),
            num(r.relative_error()),
            num(r.residual_inf),
            r.steps,
            r.converged
        );
        ok &= r.relative_error() <= 1e-2 && r.residual_inf <= 1e-6;
    }
    out_dir(&args.out)?;
    write_atomic(&args.out.join("suite.csv"), &csv)?;
    println!(
        "{} instances, {} matched the oracle",
        rows.len(),
        rows.iter()
            .filter(|r| r.relative_error() <= 1e-2 && r.residual_inf <= 1e-6)
            .count()
    );
    Ok(if ok { EXIT_OK } else { EXIT_STEP_LIMIT })
}
