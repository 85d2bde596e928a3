//! `fncalc`: verification suites and operator evaluation for the synthetic
//! Frölicher–Nijenhuis calculus engine.
//!
//! Exit codes: 0 all checks pass, 1 a check fails, 2 usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fncalc::report::sig9;
use fncalc::suite::{run_selftest, run_suite, SuiteConfig, SuiteError};
use fncalc_core::calculus::{fn_bracket, interior, lie, Connection, ConnectionSpec};
use fncalc_core::forms::{eval_on_real, FormSpec, SemiForm, VectorForm};
use fncalc_core::microcube::Microcube;

#[derive(Parser)]
#[command(
    name = "fncalc",
    version,
    about = "Synthetic Frölicher–Nijenhuis calculus: property verification and operator evaluation on R^m"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one verification suite and report its max residual.
    Verify {
        /// Suite name (see `fncalc verify help` for the list).
        suite: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        /// Emit the JSON report instead of the human line.
        #[arg(long)]
        json: bool,
        /// Larger trial counts and degree grids.
        #[arg(long)]
        extended: bool,
        /// Re-run with the suite's designated planted bug (negative control).
        #[arg(long)]
        mutate: bool,
    },
    /// Evaluate the bracket of the two forms on a cube assembled from a base
    /// point and axis directions.
    Bracket(ComputeArgs),
    /// Evaluate the interior derivation of the right form along the left one.
    Interior(ComputeArgs),
    /// Evaluate the Lie derivation of the right form along the left one with
    /// respect to a connection.
    Lie {
        #[command(flatten)]
        args: ComputeArgs,
        /// Connection spec file (JSON).
        #[arg(long)]
        connection: PathBuf,
    },
    /// Run every suite, then every suite under its planted bug (all of which
    /// must FAIL). Human lines go to stderr, the JSON report to stdout.
    Selftest {
        #[arg(long)]
        extended: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct ComputeArgs {
    /// Form spec file (JSON) for the left operand.
    #[arg(long)]
    left: PathBuf,
    /// Form spec file (JSON) for the right operand.
    #[arg(long)]
    right: PathBuf,
    /// Base point "c1,...,cm".
    #[arg(long)]
    point: String,
    /// File with one axis direction "c1,...,cm" per line (one line per cube
    /// slot; omit for degree-0 operands).
    #[arg(long)]
    dirs: Option<PathBuf>,
    /// Also write the JSON result to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ComputeResult {
    base: Vec<f64>,
    direction: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Verify {
            suite,
            dim,
            p,
            q,
            r,
            trials,
            seed,
            tol,
            json,
            extended,
            mutate,
        } => {
            let cfg = SuiteConfig {
                name: suite,
                dim,
                p,
                q,
                r,
                trials,
                seed,
                tol,
                bound: 1.0,
                poly_degree: 2,
                extended,
            };
            match run_suite(&cfg, mutate) {
                Ok((report, wall)) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::to_string(&report).expect("report serializes")
                        );
                    } else {
                        println!("{}", report.human_line(wall));
                    }
                    if report.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Cmd::Bracket(args) => run_compute(&args, |k, l| {
            Ok((
                k.degree() + l.degree(),
                Box::new(fn_bracket(k, l)?) as Box<dyn SemiForm>,
            ))
        }),
        Cmd::Interior(args) => run_compute(&args, |k, l| {
            Ok((
                k.degree() - 1 + l.degree(),
                Box::new(interior(k, l)?) as Box<dyn SemiForm>,
            ))
        }),
        Cmd::Lie { args, connection } => {
            let conn = match load_connection(&connection) {
                Ok(c) => Arc::new(c),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            };
            run_compute(&args, move |k, l| {
                Ok((
                    k.degree() + l.degree(),
                    Box::new(lie(k, l, conn.clone())?) as Box<dyn SemiForm>,
                ))
            })
        }
        Cmd::Selftest { extended, seed } => match run_selftest(seed, extended) {
            Ok((report, lines)) => {
                for line in lines {
                    eprintln!("{line}");
                }
                println!(
                    "{}",
                    serde_json::to_string(&report).expect("report serializes")
                );
                if report.pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}

fn run_compute(
    args: &ComputeArgs,
    build: impl FnOnce(
        Arc<dyn SemiForm>,
        Arc<dyn SemiForm>,
    ) -> Result<(usize, Box<dyn SemiForm>), SuiteError>,
) -> ExitCode {
    match compute(args, build) {
        Ok(result) => {
            let json = serde_json::to_string(&result).expect("result serializes");
            println!("{json}");
            if let Some(out) = &args.out {
                if let Err(e) = fs::write(out, format!("{json}\n")) {
                    eprintln!("error: cannot write {}: {e}", out.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn compute(
    args: &ComputeArgs,
    build: impl FnOnce(
        Arc<dyn SemiForm>,
        Arc<dyn SemiForm>,
    ) -> Result<(usize, Box<dyn SemiForm>), SuiteError>,
) -> Result<ComputeResult, String> {
    let left = load_form(&args.left)?;
    let right = load_form(&args.right)?;
    let point = parse_vector(&args.point)?;
    if point.len() != left.dim() {
        return Err(format!(
            "point has {} coordinates but the forms live on R^{}",
            point.len(),
            left.dim()
        ));
    }
    let (cube_degree, operator) = build(Arc::new(left), Arc::new(right))
        .map_err(|e| format!("cannot build operator: {e}"))?;
    let dirs = match &args.dirs {
        Some(path) => parse_dirs(path, point.len())?,
        None => Vec::new(),
    };
    if dirs.len() != cube_degree {
        return Err(format!(
            "operator needs {cube_degree} axis directions, got {}",
            dirs.len()
        ));
    }
    let cube = Microcube::from_axes(&point, &dirs).map_err(|e| e.to_string())?;
    let tangent = eval_on_real(&*operator, &cube).map_err(|e| e.to_string())?;
    Ok(ComputeResult {
        base: tangent.base.iter().map(|&v| sig9(v)).collect(),
        direction: tangent.dir.iter().map(|&v| sig9(v)).collect(),
    })
}

fn load_form(path: &Path) -> Result<VectorForm, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    FormSpec::from_json(&text)
        .and_then(|spec| spec.to_form())
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn load_connection(path: &Path) -> Result<Connection, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ConnectionSpec::from_json(&text)
        .and_then(|spec| spec.to_connection())
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number `{tok}`: {e}"))
        })
        .collect()
}

fn parse_dirs(path: &Path, m: usize) -> Result<Vec<Vec<f64>>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut dirs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_vector(line)?;
        if v.len() != m {
            return Err(format!("direction `{line}` does not have {m} coordinates"));
        }
        dirs.push(v);
    }
    Ok(dirs)
}
