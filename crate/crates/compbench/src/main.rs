//! Command-line front end: evaluation, optimization, benchmarking and
//! contour-grid emission.
//!
//! Exit codes: 0 success, 1 usage error or unknown function, 2 input or
//! domain error. Data goes to stdout (or `--out`), diagnostics to
//! stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use compbench::bench;
use compbench::optimizer;
use compbench::testfuns::{self, TestFunError};

#[derive(Parser)]
#[command(name = "compbench", about = "Constrained Bayesian optimization benchmark suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the twelve catalog functions
    List,
    /// Evaluate a function at one input; prints {"obj": .., "con": [..]}
    Eval {
        name: String,
        /// Comma-separated coordinates, e.g. --x 1,1,3
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Run the sequential optimizer and write the trace CSV
    Optimize {
        name: String,
        #[arg(long, default_value_t = 10)]
        start: usize,
        #[arg(long, default_value_t = 300)]
        end: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trace CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// Monte Carlo benchmark over independent replicates
    Bench {
        name: String,
        #[arg(long, default_value_t = 30)]
        reps: usize,
        #[arg(long, default_value_t = 10)]
        start: usize,
        #[arg(long, default_value_t = 300)]
        end: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report JSON path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
        /// Optional per-rep CSV path
        #[arg(long)]
        csv: Option<String>,
    },
    /// Dense evaluation grid over 1 or 2 free axes
    Grid {
        name: String,
        /// Grid resolution per free axis
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Pin a coordinate for d > 2, 1-based: --fix 3=8.0 (repeatable)
        #[arg(long = "fix")]
        fixes: Vec<String>,
        /// Grid CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 1,
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }
}

impl From<TestFunError> for CliError {
    fn from(e: TestFunError) -> Self {
        match e {
            TestFunError::UnknownFunction(_) => CliError::usage(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError {
            message: format!("I/O error: {e}"),
            code: 2,
        }
    }
}

impl From<optimizer::OptimError> for CliError {
    fn from(e: optimizer::OptimError) -> Self {
        match e {
            optimizer::OptimError::TestFun(t) => t.into(),
            optimizer::OptimError::BadBudget { .. } => CliError::usage(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn out_writer(path: &Option<String>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_coords(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|_| CliError::input(TestFunError::InvalidInput.to_string()))
}

fn cmd_list() -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "{:<10} {:>3} {:<14} {:>11}",
        "name", "dim", "type", "constraints"
    )?;
    for spec in testfuns::list_functions() {
        let (kind, m) = if spec.is_constrained() {
            ("constrained", spec.n_constraints.to_string())
        } else {
            ("unconstrained", "-".to_string())
        };
        writeln!(out, "{:<10} {:>3} {:<14} {:>11}", spec.name, spec.dim, kind, m)?;
    }
    Ok(())
}

fn cmd_eval(name: &str, coords: &str) -> Result<(), CliError> {
    let x = parse_coords(coords)?;
    let eval = testfuns::evaluate(name, &x)?;
    let con: Vec<String> = eval.con.iter().map(|&c| fmt17(c)).collect();
    println!("{{\"obj\": {}, \"con\": [{}]}}", fmt17(eval.obj), con.join(", "));
    Ok(())
}

fn cmd_optimize(
    name: &str,
    start: usize,
    end: usize,
    seed: u64,
    out: &Option<String>,
) -> Result<(), CliError> {
    let trace = optimizer::run(name, start, end, seed)?;
    let mut w = out_writer(out)?;
    trace.write_csv(&mut w)?;
    w.flush()?;
    let best = optimizer::best_feasible(&trace);
    if best.found {
        let xs: Vec<String> = best.x_best.iter().map(|v| format!("{v:.6e}")).collect();
        eprintln!(
            "best feasible objective {:.6e} at ({})",
            best.obj_best,
            xs.join(", ")
        );
    } else {
        eprintln!("no feasible point found in {end} evaluations");
    }
    Ok(())
}

fn cmd_bench(
    name: &str,
    reps: usize,
    start: usize,
    end: usize,
    seed: u64,
    out: &Option<String>,
    csv: &Option<String>,
) -> Result<(), CliError> {
    let spec = testfuns::lookup(name)?;
    let results = bench::run_reps(name, start, end, reps, seed)?;
    let report = bench::build_report(name, start, end, reps, seed, &results)
        .map_err(|e| CliError::input(e.to_string()))?;
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    let mut w = out_writer(out)?;
    writeln!(w, "{json}")?;
    w.flush()?;
    if let Some(path) = csv {
        let mut cw = BufWriter::new(File::create(path)?);
        bench::write_reps_csv(&mut cw, spec.dim, &results)?;
        cw.flush()?;
    }
    let s = report.summary;
    eprintln!(
        "{name}: min {:.7} q1 {:.7} median {:.7} mean {:.7} q3 {:.7} max {:.7} ({} reps, {} failed)",
        s.min, s.q1, s.median, s.mean, s.q3, s.max, s.n_reps, s.n_failed
    );
    Ok(())
}

fn parse_fix(s: &str) -> Result<(usize, f64), CliError> {
    let err = || CliError::usage(format!("bad --fix '{s}': expected INDEX=VALUE"));
    let (i, v) = s.split_once('=').ok_or_else(err)?;
    let idx: usize = i.trim().parse().map_err(|_| err())?;
    let val: f64 = v.trim().parse().map_err(|_| err())?;
    if idx == 0 {
        return Err(CliError::usage("--fix indices are 1-based"));
    }
    Ok((idx - 1, val))
}

fn cmd_grid(name: &str, n: usize, fixes: &[String], out: &Option<String>) -> Result<(), CliError> {
    if n < 2 {
        return Err(CliError::usage("grid resolution must be at least 2"));
    }
    let spec = testfuns::lookup(name)?;
    let d = spec.dim;
    let mut pinned: Vec<Option<f64>> = vec![None; d];
    for f in fixes {
        let (idx, val) = parse_fix(f)?;
        if idx >= d {
            return Err(CliError::usage(format!(
                "--fix index {} out of range for {name} (d={d})",
                idx + 1
            )));
        }
        if val < spec.domain.lower()[idx] || val > spec.domain.upper()[idx] {
            return Err(CliError::input(TestFunError::OutOfDomain.to_string()));
        }
        pinned[idx] = Some(val);
    }
    let free: Vec<usize> = (0..d).filter(|&j| pinned[j].is_none()).collect();
    if free.is_empty() || free.len() > 2 {
        return Err(CliError::input(format!(
            "grid needs 1 or 2 free axes, got {} (pin coordinates with --fix)",
            free.len()
        )));
    }

    let axis = |j: usize, i: usize| {
        let lo = spec.domain.lower()[j];
        let hi = spec.domain.upper()[j];
        if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };

    let mut w = out_writer(out)?;
    let mut header: Vec<String> = free.iter().map(|j| format!("x{}", j + 1)).collect();
    header.push("obj".to_string());
    for k in 1..=spec.n_constraints {
        header.push(format!("con{k}"));
    }
    writeln!(w, "{}", header.join(","))?;

    let mut x: Vec<f64> = (0..d).map(|j| pinned[j].unwrap_or(0.0)).collect();
    let outer = if free.len() == 2 { n } else { 1 };
    // Row-major with the first free axis fastest.
    for io_ in 0..outer {
        if free.len() == 2 {
            x[free[1]] = axis(free[1], io_);
        }
        for ii in 0..n {
            x[free[0]] = axis(free[0], ii);
            let eval = testfuns::evaluate(name, &x)?;
            let mut fields: Vec<String> = free.iter().map(|&j| fmt17(x[j])).collect();
            fields.push(fmt17(eval.obj));
            for c in &eval.con {
                fields.push(fmt17(*c));
            }
            writeln!(w, "{}", fields.join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::List => cmd_list(),
        Command::Eval { name, x } => cmd_eval(&name, &x),
        Command::Optimize {
            name,
            start,
            end,
            seed,
            out,
        } => cmd_optimize(&name, start, end, seed, &out),
        Command::Bench {
            name,
            reps,
            start,
            end,
            seed,
            out,
            csv,
        } => cmd_bench(&name, reps, start, end, seed, &out, &csv),
        Command::Grid { name, n, fixes, out } => cmd_grid(&name, n, &fixes, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}
