use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler_core::catalog::Catalog;
use finsler_core::verify::{
    self, check_names, deform_check, pde_scan, Execution, Options, TolProfile,
};
use finsler_core::Error;
use serde_json::json;

/// Verification runner for projectively flat general (alpha, beta)-metrics.
///
/// Extra catalog files (TOML, one `[metric.NAME]` or `[deformation.NAME]`
/// table per entry) are read from the paths in FINSLER_LAB_CATALOG.
///
/// Exit status: 0 when every check passes, 1 when a check fails, 2 for an
/// unknown name, bad flags or an entry routed to the wrong deformation.
#[derive(Parser)]
#[command(name = "finsler-lab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List catalog entries.
    List {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Show one entry and the checks run on it.
    Info { name: String },
    /// Randomized pointwise verification of a metric.
    Verify {
        name: String,
        #[arg(long, default_value_t = verify::DEFAULT_SAMPLES)]
        samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Residuals of the defining equations on a (b^2, s) grid.
    PdeScan {
        name: String,
        /// Grid size as AxB (b^2 points x s points).
        #[arg(long, default_value = "20x20", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long, default_value = "jet", value_parser = parse_profile)]
        tol_profile: TolProfile,
        /// Override a tolerance: NAME=VALUE (repeatable).
        #[arg(long = "tol", value_parser = parse_override)]
        tol: Vec<(String, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the flattening deformation of an entry's chart.
    DeformCheck {
        name: String,
        #[arg(long, default_value_t = verify::DEFAULT_DEFORM_SAMPLES)]
        samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = verify::DEFAULT_DIM as u64, value_parser = clap::value_parser!(u64).range(2..=4))]
    dim: u64,
    #[arg(long, default_value = "jet", value_parser = parse_profile)]
    tol_profile: TolProfile,
    /// Override a tolerance: NAME=VALUE (repeatable).
    #[arg(long = "tol", value_parser = parse_override)]
    tol: Vec<(String, f64)>,
    /// Evaluate samples on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn options(&self, samples: usize) -> Options {
        if self.dim == 2 {
            eprintln!("warning: n = 2 lies outside the dimensions the theory covers (n >= 3)");
        }
        Options {
            samples,
            seed: self.seed,
            dim: self.dim as usize,
            profile: self.tol_profile,
            overrides: self.tol.clone(),
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        }
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got '{s}'"))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a < 2 || b < 2 {
        return Err("grid sides must be at least 2".into());
    }
    Ok((a, b))
}

fn parse_profile(s: &str) -> Result<TolProfile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.to_string(), v))
}

/// Exit status for an error: 2 for usage problems, 1 otherwise.
fn status(e: &Error) -> u8 {
    match e {
        Error::UnknownMetric(_)
        | Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::UnsupportedSignature(_) => 2,
        _ => 1,
    }
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(name: &str, pass: bool, checks: &[verify::Check]) -> u8 {
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if pass {
        eprintln!("{name}: pass ({} checks)", checks.len());
        0
    } else {
        eprintln!("{name}: FAIL ({})", failed.join(", "));
        1
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let catalog = Catalog::load()?;
    match cli.cmd {
        Cmd::List { json } => {
            let list = catalog.summaries();
            if json {
                emit(&serde_json::to_value(&list).expect("serializable"), None)?;
            } else {
                for e in &list {
                    let k = e.expected_k.map(|k| format!("K = {k}")).unwrap_or_default();
                    println!("{:<20} {:<12} {:<18} {:<10} {}", e.name, e.kind, e.family, k, e.description);
                }
            }
            Ok(0)
        }
        Cmd::Info { name } => {
            let e = catalog.entry(&name)?;
            let v = json!({ "entry": e, "checks": check_names(e) });
            emit(&v, None)?;
            Ok(0)
        }
        Cmd::Verify { name, samples, run } => {
            let e = catalog.entry(&name)?;
            let r = verify::verify(e, &run.options(samples))?;
            emit(&serde_json::to_value(&r).expect("serializable"), run.out.as_ref())?;
            Ok(verdict(&name, r.pass, &r.checks))
        }
        Cmd::PdeScan {
            name,
            grid,
            tol_profile,
            tol,
            out,
        } => {
            let e = catalog.entry(&name)?;
            let r = pde_scan(e, grid, tol_profile, &tol)?;
            emit(&serde_json::to_value(&r).expect("serializable"), out.as_ref())?;
            Ok(verdict(&name, r.pass, &r.checks))
        }
        Cmd::DeformCheck { name, samples, run } => {
            let e = catalog.entry(&name)?;
            let r = deform_check(e, &run.options(samples))?;
            emit(&serde_json::to_value(&r).expect("serializable"), run.out.as_ref())?;
            Ok(verdict(&name, r.pass, &r.checks))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status(&e))
        }
    }
}
