//! Command-line front end: parses baseline/model specs, runs the checks,
//! and emits machine-readable JSON reports.
//!
//! Exit codes: 0 = every requested order holds (or the command succeeded),
//! 1 = a requested order failed (or a falsification counterexample was
//! found), 2 = inconclusive, 3 = a rule conclusion was refuted by its own
//! grid validation (implementation bug or tolerance failure), 4 = usage,
//! parse, or domain error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scalemax::Error;

/// Environment variable naming the default directory for CSV exports and
/// grid dumps given as relative paths.
pub const OUTPUT_DIR_ENV: &str = "SCALEMAX_OUTPUT_DIR";

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }

    fn from_core(e: Error) -> Self {
        let code = match e {
            Error::Contradiction { .. } => 3,
            _ => 4,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::from_core(e)
    }
}

#[derive(Parser)]
#[command(
    name = "scalemax",
    about = "Compare parallel-system lifetimes in scale families: order checks, \
             majorization, condition verification, simulation, falsification",
    version
)]
struct Cli {
    /// Flat key=value file supplying defaults for flags not given here.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Evaluation grid: tmin,tmax,points,log|lin.
    #[arg(long, global = true)]
    grid: Option<String>,

    /// Relative comparison tolerance for grid checks.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify stochastic orders between two systems and run the rule engine
    Compare(CompareArgs),
    /// Check the analytic preconditions of a baseline on the grid
    VerifyConditions(VerifyConditionsArgs),
    /// Compare two positive vectors under majorization preorders
    Majorize(MajorizeArgs),
    /// Sample system lifetimes and compare against the analytic CDF
    Simulate(SimulateArgs),
    /// Randomized validation of a comparison rule
    Falsify(FalsifyArgs),
}

#[derive(Args)]
struct CompareArgs {
    /// Baseline spec: `exp`, `weibull:shape=<v>`, `gamma:shape=<v>`, or
    /// `gg:beta=<v>,alpha=<v>`.
    #[arg(long)]
    baseline: Option<String>,

    /// Second baseline for the two-baseline outlier form (applies to the
    /// common-scale block).
    #[arg(long)]
    baseline2: Option<String>,

    /// Scale vector of system X, e.g. 1,3.
    #[arg(long)]
    lambda: Option<String>,

    /// Scale vector of system Y, e.g. 0.5,3.5.
    #[arg(long)]
    theta: Option<String>,

    /// Outlier form for X: p=<int>,lambda1=<v>,q=<int>,lambda=<v>.
    #[arg(long)]
    outlier: Option<String>,

    /// Moving-block scale of Y in the outlier form.
    #[arg(long = "lambda1-star")]
    lambda1_star: Option<f64>,

    /// Which orders to certify: st | rh | lr | all.
    #[arg(long)]
    order: Option<String>,

    /// Write t, F_X, F_Y, r_X, r_Y, f_X, f_Y as CSV to this path.
    #[arg(long = "dump-grid")]
    dump_grid: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyConditionsArgs {
    /// Baseline spec (see `compare`).
    #[arg(long)]
    baseline: Option<String>,

    /// Write t, psi, eta, chi as CSV to this path.
    #[arg(long = "dump-grid")]
    dump_grid: Option<PathBuf>,
}

#[derive(Args)]
struct MajorizeArgs {
    /// First vector, e.g. 1,3.
    #[arg(long)]
    x: Option<String>,

    /// Second vector, e.g. 0.5,3.5.
    #[arg(long)]
    y: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Baseline spec (see `compare`).
    #[arg(long)]
    baseline: Option<String>,

    /// Scale vector, e.g. 1,2.
    #[arg(long)]
    lambda: Option<String>,

    /// Number of draws.
    #[arg(long)]
    n: Option<usize>,

    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Export the batch as single-column CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct FalsifyArgs {
    /// Rule id (descriptive or short alias, e.g. weak-supermajorization-rh
    /// or thm2).
    #[arg(long)]
    theorem: Option<String>,

    /// Number of sampled instances.
    #[arg(long)]
    trials: Option<u32>,

    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Drop a hypothesis and only tally outcomes (supported: min-scale).
    #[arg(long)]
    drop: Option<String>,

    /// Grid points per trial.
    #[arg(long = "grid-points")]
    grid_points: Option<usize>,

    /// Shape range lo,hi for the first shape parameter.
    #[arg(long = "beta-range")]
    beta_range: Option<String>,

    /// Shape range lo,hi for the second shape parameter.
    #[arg(long = "alpha-range")]
    alpha_range: Option<String>,

    /// Scale range lo,hi.
    #[arg(long = "lambda-range")]
    lambda_range: Option<String>,

    /// Component-count range lo,hi for vector rules.
    #[arg(long = "n-range")]
    n_range: Option<String>,

    /// Block-size cap for outlier rules.
    #[arg(long = "pq-max")]
    pq_max: Option<usize>,
}

// ---------------------------------------------------------------------------
// Shared parsers
// ---------------------------------------------------------------------------

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("`{piece}` is not a number"))
        })
        .collect()
}

pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_f64_list(s)?;
    if v.len() != 2 {
        return Err(format!("expected `lo,hi`, got `{s}`"));
    }
    Ok((v[0], v[1]))
}

pub fn parse_usize_pair(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `lo,hi`, got `{s}`"));
    }
    let lo = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not an integer", parts[0]))?;
    let hi = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not an integer", parts[1]))?;
    Ok((lo, hi))
}

pub fn parse_grid_spec(s: &str) -> Result<scalemax::Grid, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected `tmin,tmax,points,log|lin`, got `{s}`"));
    }
    let t_min: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", parts[0]))?;
    let t_max: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", parts[1]))?;
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not an integer", parts[2]))?;
    let spacing = match parts[3].trim() {
        "log" => scalemax::Spacing::Log,
        "lin" => scalemax::Spacing::Linear,
        other => return Err(format!("spacing must be `log` or `lin`, got `{other}`")),
    };
    scalemax::Grid::new(t_min, t_max, points, spacing).map_err(|e| e.to_string())
}

/// Outlier spec: p=<int>,lambda1=<v>,q=<int>,lambda=<v>.
pub struct OutlierSpec {
    pub p: usize,
    pub lambda1: f64,
    pub q: usize,
    pub lambda: f64,
}

pub fn parse_outlier_spec(s: &str) -> Result<OutlierSpec, String> {
    let mut p = None;
    let mut q = None;
    let mut lambda1 = None;
    let mut lambda = None;
    for piece in s.split(',') {
        let Some(eq) = piece.find('=') else {
            return Err(format!("expected `key=value`, got `{piece}`"));
        };
        let key = piece[..eq].trim();
        let value = piece[eq + 1..].trim();
        match key {
            "p" => p = Some(value.parse().map_err(|_| format!("bad p `{value}`"))?),
            "q" => q = Some(value.parse().map_err(|_| format!("bad q `{value}`"))?),
            "lambda1" => {
                lambda1 = Some(value.parse().map_err(|_| format!("bad lambda1 `{value}`"))?)
            }
            "lambda" => {
                lambda = Some(value.parse().map_err(|_| format!("bad lambda `{value}`"))?)
            }
            other => return Err(format!("unknown outlier field `{other}`")),
        }
    }
    Ok(OutlierSpec {
        p: p.ok_or("missing field `p`")?,
        lambda1: lambda1.ok_or("missing field `lambda1`")?,
        q: q.ok_or("missing field `q`")?,
        lambda: lambda.ok_or("missing field `lambda`")?,
    })
}

/// Resolves an output path against SCALEMAX_OUTPUT_DIR for relative paths.
pub fn resolve_output_path(path: PathBuf) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let config = match &cli.config {
        Some(path) => config::ConfigFile::load(path)?,
        None => config::ConfigFile::empty(),
    };

    let mut grid = cli.grid;
    config.fill(&mut grid, "grid", |s| Ok::<_, String>(s.to_string()))?;
    let grid = grid
        .map(|s| parse_grid_spec(&s).map_err(CliError::usage))
        .transpose()?;

    let mut tol = cli.tol;
    config.fill(&mut tol, "tol", |s| s.parse::<f64>())?;
    let tol = tol.unwrap_or(scalemax::DEFAULT_TOLERANCE);

    match cli.command {
        Command::Compare(args) => commands::compare(args, &config, grid, tol),
        Command::VerifyConditions(args) => {
            commands::verify_conditions(args, &config, grid, tol)
        }
        Command::Majorize(args) => commands::majorize(args, &config),
        Command::Simulate(args) => commands::simulate(args, &config),
        Command::Falsify(args) => commands::falsify(args, &config, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
