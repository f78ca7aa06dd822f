//! `ffrestrict`: run verification suites, scans, norm searches and
//! subspace searches over `F_p^d`, writing CSV and NDJSON reports.
//!
//! Exit status: 0 when every row passes, 1 on a mathematical violation,
//! 2 on a usage or configuration error.

mod settings;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ffrestrict::geometry::max_affine_subspace;
use ffrestrict::restriction::norm_lower_bound;
use ffrestrict::suites::trial_seed;
use ffrestrict::{emit_report, exit_code, run_scan, run_verify, FieldCtx, Num, ReportRow};

use settings::{parse_one, parse_ratio, pick, Common, Format, Resolved};

#[derive(Debug, Parser)]
#[command(name = "ffrestrict", version, about = "Finite-field restriction experiments for the paraboloid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the selected suites and fail on any violated check.
    Verify(Common),
    /// Run the selected suites and append a max-ratio row per (suite, p, d).
    Scan(Common),
    /// Search for lower bounds on the extension constant R*(p_exp -> r).
    Norms {
        #[command(flatten)]
        common: Common,
        #[arg(long = "p-exp", env = "FFR_P_EXP")]
        p_exp: Option<String>,
        #[arg(long, env = "FFR_R")]
        r: Option<String>,
        #[arg(long, env = "FFR_ITERS")]
        iters: Option<String>,
    },
    /// Find a line (k=1) or plane (k=2) inside the paraboloid.
    Subspace {
        #[command(flatten)]
        common: Common,
        #[arg(long, env = "FFR_K")]
        k: Option<String>,
    },
}

enum Failure {
    Usage(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let (resolved, rows) = match cli.command {
        Command::Verify(common) => {
            let r = common.resolve().map_err(Failure::Usage)?;
            let rows = run_verify(&r.run)?;
            (r, rows)
        }
        Command::Scan(common) => {
            let r = common.resolve().map_err(Failure::Usage)?;
            let rows = run_scan(&r.run)?;
            (r, rows)
        }
        Command::Norms { common, p_exp, r, iters } => {
            let res = common.resolve().map_err(Failure::Usage)?;
            let rows = norms(&res, p_exp.as_deref(), r.as_deref(), iters.as_deref())?;
            (res, rows)
        }
        Command::Subspace { common, k } => {
            let res = common.resolve().map_err(Failure::Usage)?;
            let rows = subspace(&res, k.as_deref())?;
            (res, rows)
        }
    };
    write_rows(&resolved, &rows)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    eprintln!("{} rows, {} failed", rows.len(), failed);
    Ok(exit_code(&rows))
}

fn write_rows(res: &Resolved, rows: &[ReportRow]) -> Result<(), Failure> {
    if let Some(dir) = &res.out {
        emit_report(rows, dir).map_err(|e| Failure::Usage(format!("cannot write to {}: {e}", dir.display())))?;
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match res.format {
        Format::Table => ffrestrict::report::write_table(rows, &mut out)?,
        Format::Records => ffrestrict::report::write_records(rows, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn check_grid(res: &Resolved) -> Result<(), Failure> {
    if res.run.dims.iter().any(|&d| d < 2) {
        return Err(Failure::Usage("dimensions must be at least 2".into()));
    }
    for &p in &res.run.primes {
        FieldCtx::new(p)?;
    }
    Ok(())
}

fn norms(res: &Resolved, p_exp: Option<&str>, r: Option<&str>, iters: Option<&str>) -> Result<Vec<ReportRow>, Failure> {
    check_grid(res)?;
    let p_exp = parse_ratio("p-exp", pick(p_exp, &res.file, "p_exp").unwrap_or("2")).map_err(Failure::Usage)?;
    let r = parse_ratio("r", pick(r, &res.file, "r").unwrap_or("4")).map_err(Failure::Usage)?;
    let iters: usize = parse_one("iters", pick(iters, &res.file, "iters").unwrap_or("200")).map_err(Failure::Usage)?;
    let mut rows = Vec::new();
    for &p in &res.run.primes {
        let ctx = FieldCtx::new(p)?;
        for &d in &res.run.dims {
            for t in 0..res.run.trials {
                let seed = trial_seed(res.run.seed, "norms", ctx.p(), d, t);
                let est = norm_lower_bound(&ctx, d, p_exp, r, iters, seed, &res.run.limits)?;
                rows.push(ReportRow {
                    suite: "norms".into(),
                    p: ctx.p(),
                    d,
                    case: format!("{}-{}/{}-to-{}/{}-{t}", est.method.label(), p_exp.numer(), p_exp.denom(), r.numer(), r.denom()),
                    lhs: Num::Real(est.best_value),
                    rhs: Num::Int(1),
                    ratio: Num::Real(est.best_value),
                    pass: est.best_value.is_finite(),
                    seed,
                    ms: 0,
                });
            }
        }
    }
    Ok(rows)
}

fn subspace(res: &Resolved, k: Option<&str>) -> Result<Vec<ReportRow>, Failure> {
    check_grid(res)?;
    let k: usize = parse_one("k", pick(k, &res.file, "k").unwrap_or("1")).map_err(Failure::Usage)?;
    let mut rows = Vec::new();
    for &p in &res.run.primes {
        let ctx = FieldCtx::new(p)?;
        for &d in &res.run.dims {
            let found = max_affine_subspace(&ctx, d, k, &res.run.limits)?;
            let (case, size, pass) = match &found {
                Some(w) => {
                    let dirs: Vec<String> = w
                        .directions
                        .iter()
                        .map(|v| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
                        .collect();
                    (format!("flat-k{k}-[{}]", dirs.join(";")), w.points(&ctx).len() as u64, w.verify(&ctx))
                }
                None => (format!("flat-k{k}-none"), 0, true),
            };
            rows.push(ReportRow {
                suite: "subspaces".into(),
                p: ctx.p(),
                d,
                case,
                lhs: Num::Int(size),
                rhs: Num::Int(u64::from(ctx.p()).pow(k as u32)),
                ratio: Num::Real(size as f64 / f64::from(ctx.p()).powi(k as i32)),
                pass,
                seed: res.run.seed,
                ms: 0,
            });
        }
    }
    Ok(rows)
}
