//! Command-line front end: solve one expression, run a benchmark suite, or
//! print convergence-order tables.

use crate::bench::{self, BenchResult, CellStatus};
use crate::diagnostics::convergence_orders;
use crate::expr::parse;
use crate::solvers::{run, Method, Problem, SolverConfig, Status};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "mroot",
    about = "Scalar rootfinding for non-simple roots: Newton-Anderson and comparison methods",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve f(x) = 0 for a single expression with one method.
    Solve(SolveArgs),
    /// Run a built-in benchmark suite and write CSV files.
    Bench(BenchArgs),
    /// Print empirical convergence-order rows for a suite.
    Orders(OrdersArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Newton,
    ModifiedNewton,
    NewtonAnderson,
    AdaptiveNewton,
    Secant,
    HalleyLike,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Newton => Method::Newton,
            MethodArg::ModifiedNewton => Method::ModifiedNewton,
            MethodArg::NewtonAnderson => Method::NewtonAnderson,
            MethodArg::AdaptiveNewton => Method::AdaptiveNewton,
            MethodArg::Secant => Method::Secant,
            MethodArg::HalleyLike => Method::HalleyLike,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Expression in x, e.g. "(x^2-1)^2*log(x)".
    #[arg(long)]
    pub expr: String,
    /// Iteration method.
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Initial iterate.
    #[arg(long)]
    pub x0: f64,
    /// Stopping tolerance on |x_{k+1} - x_k|.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Known root multiplicity (required by modified-newton).
    #[arg(long)]
    pub multiplicity: Option<f64>,
    /// Secant initialisation offset: x_{-1} = x0 - offset.
    #[arg(long, default_value_t = 1e-3)]
    pub secant_offset: f64,
    /// Print the trace with full precision.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Suite name: quarteroni-q2, quarteroni-q6, exp-p6, or orders.
    #[arg(long)]
    pub suite: String,
    /// Output directory for the CSV files (default: $MROOT_OUT or ".").
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also print per-cell detail lines.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct OrdersArgs {
    /// Suite name (the `orders` suite reproduces the paper-style table).
    #[arg(long, default_value = "orders")]
    pub suite: String,
}

/// Significant-digit formatting helpers: 6 digits in tables, 15 in verbose
/// traces.
fn sig(v: f64, digits: usize) -> String {
    let s = format!("{v:.*e}", digits - 1);
    // normalise "1.00000e0"-style output back to plain decimal when short
    match s.parse::<f64>() {
        Ok(x) if x.abs() < 1e6 && x.abs() >= 1e-4 || x == 0.0 => {
            let plain = format!("{x}");
            if plain.len() <= digits + 4 {
                plain
            } else {
                s
            }
        }
        _ => s,
    }
}

fn pk_display(p: Option<f64>) -> String {
    match p {
        Some(v) => format!("{v:.4}"),
        None => "-".to_string(),
    }
}

pub fn dispatch(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Orders(args) => cmd_orders(args),
    }
}

fn cmd_solve(args: SolveArgs) -> i32 {
    let expr = match parse(&args.expr) {
        Ok(e) => e,
        Err(err) => {
            eprintln!(
                "error: cannot parse --expr at byte {}: {}",
                err.offset(),
                err
            );
            return 1;
        }
    };
    let method: Method = args.method.into();
    if method == Method::ModifiedNewton && args.multiplicity.is_none() {
        eprintln!("error: --method modified-newton requires --multiplicity");
        return 1;
    }
    let mut problem = Problem::new(expr);
    if let Some(p) = args.multiplicity {
        problem = problem.with_multiplicity(p);
    }
    let mut config = SolverConfig::new(method, args.x0)
        .with_tol(args.tol)
        .with_max_iter(args.max_iter);
    config.secant_offset = args.secant_offset;
    let trace = match run(&problem, &config) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };

    let digits = if args.verbose { 15 } else { 6 };
    println!("{:>4}  {:>22}  {:>12}  {:>9}", "k", "x_k", "|step|", "p_k");
    for r in &trace.records {
        println!(
            "{:>4}  {:>22}  {:>12}  {:>9}",
            r.k,
            sig(r.x, digits),
            r.step.map(|s| sig(s, 6)).unwrap_or_else(|| "-".to_string()),
            pk_display(r.p),
        );
    }
    let iterations = trace
        .iterations_to_converge
        .unwrap_or_else(|| trace.records.last().map(|r| r.k).unwrap_or(0));
    println!(
        "{} {} {} {}",
        trace.status.name(),
        iterations,
        trace.final_x(),
        pk_display(trace.final_p()),
    );
    if trace.status == Status::Converged {
        0
    } else {
        2
    }
}

/// Render the paper-style grid: one row per x0, one column per method.
fn format_bench_table(suite: &str, results: &[BenchResult]) -> String {
    let mut x0s: Vec<f64> = Vec::new();
    let mut methods: Vec<Method> = Vec::new();
    for r in results {
        if !x0s.contains(&r.x0) {
            x0s.push(r.x0);
        }
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let cell = |m: Method, x0: f64| -> String {
        results
            .iter()
            .find(|r| r.method == m && r.x0 == x0)
            .map(|r| match r.status {
                CellStatus::Converged => match r.final_pk {
                    Some(p) => format!("{} ({p:.4})", r.iterations),
                    None => format!("{}", r.iterations),
                },
                _ => r.status.label(),
            })
            .unwrap_or_default()
    };
    let mut widths: Vec<usize> = methods.iter().map(|m| m.name().len()).collect();
    for (j, &m) in methods.iter().enumerate() {
        for &x0 in &x0s {
            widths[j] = widths[j].max(cell(m, x0).len());
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "suite {suite}");
    let _ = write!(out, "{:>8}", "x0");
    for (j, m) in methods.iter().enumerate() {
        let _ = write!(out, "  {:>w$}", m.name(), w = widths[j]);
    }
    let _ = writeln!(out);
    for &x0 in &x0s {
        let _ = write!(out, "{:>8}", sig(x0, 6));
        for (j, &m) in methods.iter().enumerate() {
            let _ = write!(out, "  {:>w$}", cell(m, x0), w = widths[j]);
        }
        let _ = writeln!(out);
    }
    out
}

fn cmd_bench(args: BenchArgs) -> i32 {
    let Some(suite) = bench::builtin_suite(&args.suite) else {
        eprintln!(
            "error: unknown suite {:?}; available: {}",
            args.suite,
            bench::suite_names().join(", ")
        );
        return 1;
    };
    let results = match bench::run_suite(&suite) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let out_dir = args
        .out
        .or_else(|| std::env::var_os("MROOT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if let Err(err) = std::fs::create_dir_all(&out_dir) {
        eprintln!("error: cannot create {}: {err}", out_dir.display());
        return 1;
    }
    let results_path = out_dir.join(format!("{}-results.csv", args.suite));
    let steps_path = out_dir.join(format!("{}-steps.csv", args.suite));
    if let Err(err) = std::fs::write(&results_path, bench::emit_results_csv(&results)) {
        eprintln!("error: cannot write {}: {err}", results_path.display());
        return 1;
    }
    if let Err(err) = std::fs::write(&steps_path, bench::emit_steps_csv(&results)) {
        eprintln!("error: cannot write {}: {err}", steps_path.display());
        return 1;
    }
    print!("{}", format_bench_table(&args.suite, &results));
    if args.verbose {
        for r in &results {
            println!(
                "{} {} x0={} -> {} in {} (err {:.3e})",
                r.case_id,
                r.method.name(),
                sig(r.x0, 6),
                r.status.label(),
                r.iterations,
                r.final_error,
            );
        }
    }
    println!("wrote {}", results_path.display());
    println!("wrote {}", steps_path.display());
    0
}

fn cmd_orders(args: OrdersArgs) -> i32 {
    let Some(suite) = bench::builtin_suite(&args.suite) else {
        eprintln!(
            "error: unknown suite {:?}; available: {}",
            args.suite,
            bench::suite_names().join(", ")
        );
        return 1;
    };
    let mut kmin = usize::MAX;
    let mut kmax = 0;
    let mut rows = Vec::new();
    for case in &suite {
        let expr = match bench::validate_case(case) {
            Ok(e) => e,
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        };
        let problem = Problem::new(expr).with_known_root(case.known_root);
        for &x0 in &case.x0_list {
            let config = SolverConfig::new(Method::NewtonAnderson, x0).with_tol(case.tol);
            let trace = match run(&problem, &config) {
                Ok(t) => t,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            let seq = convergence_orders(&trace, case.known_root);
            for &(k, _) in &seq.entries {
                kmin = kmin.min(k);
                kmax = kmax.max(k);
            }
            rows.push((case.id.clone(), x0, seq));
        }
    }
    if rows.is_empty() || kmin > kmax {
        println!("no admissible convergence orders");
        return 0;
    }
    print!("{:>8} {:>6}", "case", "x0");
    for k in kmin..=kmax {
        print!(" {:>8}", format!("q_{k}"));
    }
    println!();
    for (id, x0, seq) in &rows {
        print!("{:>8} {:>6}", id, sig(*x0, 6));
        for k in kmin..=kmax {
            match seq.entries.iter().find(|&&(kk, _)| kk == k) {
                Some(&(_, q)) => print!(" {:>8.4}", q),
                None => print!(" {:>8}", ""),
            }
        }
        println!();
    }
    0
}

/// Binary entry point: parse, dispatch, map clap errors to the documented
/// exit codes (usage errors are 1; --help and --version are 0).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli),
        Err(err) => match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{err}");
                0
            }
            _ => {
                eprint!("{err}");
                1
            }
        },
    }
}
