//! Command-line front end. Every command resolves a [`RunConfig`] from
//! defaults, an optional `--config` file and flags (later layers win), then
//! writes CSV or a text report.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 numerical failure,
//! 3 verification failure.

mod commands;
mod config;
mod verify;

pub use config::{Method, OutputFormat, RunConfig, Settings};
pub use verify::{run_suite, Check, Tolerances, SUITES};

use crate::apps::AppsError;
use crate::catalog::CatalogError;
use crate::deform::DeformError;
use crate::expr::ExprError;
use crate::numerics::NumericsError;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    /// The reader of standard output went away; not reported.
    #[error("output closed")]
    Closed,
    #[error("{0}")]
    Numerical(String),
    #[error("{} check(s) failed: {}", .0.len(), .0.join("; "))]
    Verification(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Closed => 0,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        match e.kind() {
            std::io::ErrorKind::BrokenPipe => CliError::Closed,
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::Domain(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<DeformError> for CliError {
    fn from(e: DeformError) -> Self {
        match e {
            DeformError::Expr(e) => e.into(),
            DeformError::InvalidOmega(_)
            | DeformError::ForeignVariable(_)
            | DeformError::DegenerateParameters(_)
            | DeformError::InvalidSpan(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::Expr(e) => e.into(),
            CatalogError::Deform(e) => e.into(),
            CatalogError::InvalidParameter(_) | CatalogError::MissingParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<AppsError> for CliError {
    fn from(e: AppsError) -> Self {
        match e {
            AppsError::Expr(e) => e.into(),
            AppsError::Deform(e) => e.into(),
            AppsError::Catalog(e) => e.into(),
            AppsError::InvalidParameter(_) | AppsError::NegativeAlpha(_) | AppsError::ApproxOutOfRegime { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lienard", version, about = "Deformed harmonic oscillators: generate, solve and verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the generated equation and its first integral.
    Derive(Common),
    /// Integrate a deformed oscillator and write `t,x,v`.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        initial: Initial,
        /// first-integral or generated.
        #[arg(long)]
        method: Option<String>,
    },
    /// Run a named check suite and report one line per check.
    Verify {
        #[command(flatten)]
        common: Common,
        /// theorem, catalog, phase, energy, isochrony, hypergeometric, rcd, beam,
        /// riccati or all.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Travelling wave of the reaction-convection-diffusion equation; writes `xi,u`.
    /// Needs `--param beta=.. --param gamma=.. --param delta=.. --param A=..`.
    Rcd(Common),
    /// Cantilever-beam vibration; writes `t,u,v`.
    Beam {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        initial: Initial,
        #[arg(long, allow_hyphen_values = true)]
        alpha_coef: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        beta_coef: Option<String>,
        /// approx or direct.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Evaluate a closed-form catalog solution; writes `t,x,v`.
    Catalog {
        #[command(flatten)]
        common: Common,
        /// Case name, e.g. case3 or harmonic.
        #[arg(long = "case")]
        case: Option<String>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Flat key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// A positive number or an expression in t.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// name=value, repeatable.
    #[arg(long, allow_hyphen_values = true)]
    param: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    rtol: Option<String>,
    #[arg(long)]
    atol: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args)]
struct Initial {
    /// Initial position at t0.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Initial velocity at t0.
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        let flags = [
            ("f", &self.f),
            ("g", &self.g),
            ("omega", &self.omega),
            ("alpha", &self.alpha),
            ("t0", &self.t0),
            ("t1", &self.t1),
            ("samples", &self.samples),
            ("rtol", &self.rtol),
            ("atol", &self.atol),
            ("format", &self.format),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v.clone())?;
            }
        }
        if let Some(out) = &self.out {
            s.set("out", out.to_string_lossy())?;
        }
        for p in &self.param {
            let (k, v) = config::split_param(p)?;
            s.set(&format!("param.{k}"), v)?;
        }
        Ok(s)
    }
}

fn set_opt(s: &mut Settings, key: &str, v: &Option<String>) -> Result<(), CliError> {
    match v {
        Some(v) => s.set(key, v.clone()),
        None => Ok(()),
    }
}

fn resolve(cmd: &Command) -> Result<RunConfig, CliError> {
    let (name, common) = match cmd {
        Command::Derive(c) => ("derive", c),
        Command::Solve { common, .. } => ("solve", common),
        Command::Verify { common, .. } => ("verify", common),
        Command::Rcd(c) => ("rcd", c),
        Command::Beam { common, .. } => ("beam", common),
        Command::Catalog { common, .. } => ("catalog", common),
    };
    let mut flags = common.settings()?;
    match cmd {
        Command::Solve { initial, method, .. } => {
            set_opt(&mut flags, "x0", &initial.x0)?;
            set_opt(&mut flags, "v0", &initial.v0)?;
            set_opt(&mut flags, "method", method)?;
        }
        Command::Verify { suite, .. } => set_opt(&mut flags, "suite", suite)?,
        Command::Beam { initial, alpha_coef, beta_coef, mode, .. } => {
            set_opt(&mut flags, "x0", &initial.x0)?;
            set_opt(&mut flags, "v0", &initial.v0)?;
            set_opt(&mut flags, "alpha-coef", alpha_coef)?;
            set_opt(&mut flags, "beta-coef", beta_coef)?;
            set_opt(&mut flags, "mode", mode)?;
        }
        Command::Catalog { case, .. } => set_opt(&mut flags, "case", case)?,
        Command::Derive(_) | Command::Rcd(_) => {}
    }
    let mut settings = match &common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    settings.merge(&flags);
    RunConfig::from_settings(name, &settings)
}

/// Execute a resolved configuration, writing its output to `out`.
pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.command.as_str() {
        "derive" => commands::derive(cfg, out),
        "solve" => commands::solve(cfg, out),
        "verify" => verify::verify(cfg, out),
        "rcd" => commands::rcd(cfg, out),
        "beam" => commands::beam(cfg, out),
        "catalog" => commands::catalog(cfg, out),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

/// Parse `args` (program name first), run, and return the exit code.
/// Output goes to `--out` when given and to `stdout` otherwise; diagnostics
/// go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = resolve(&cli.command).and_then(|cfg| match &cfg.out {
        Some(path) => {
            let mut buf = Vec::new();
            let r = execute(&cfg, &mut buf);
            std::fs::write(path, &buf).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            r
        }
        None => execute(&cfg, stdout),
    });
    match result {
        Ok(()) | Err(CliError::Closed) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Header row then one comma-separated row per record, each value with 17
/// significant digits.
pub fn write_csv(out: &mut dyn Write, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("lienard").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn csv_round_trips() {
        let mut buf = Vec::new();
        let v = [0.1, -1.0 / 3.0, 1e-300, 123456.789];
        write_csv(&mut buf, &["a", "b", "c", "d"], &[v.to_vec()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(row, v);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["solve", "--f", "x +"]).0, 1);
        assert_eq!(run_args(&["bogus"]).0, 1);
        assert_eq!(run_args(&["verify", "--suite", "nope"]).0, 1);
        assert_eq!(run_args(&["solve", "--samples", "1"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
        let (code, _, err) = run_args(&["solve", "--f", "-0.75*v + 1", "--t0", "1", "--x0", "0.5", "--t1", "5"]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn harmonic_solve_matches_sine() {
        let (code, out, err) = run_args(&["solve", "--x0", "0", "--v0", "1", "--t1", "6.283185307179586"]);
        assert_eq!(code, 0, "{err}");
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("t,x,v"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 100);
        for r in rows {
            assert!((r[1] - r[0].sin()).abs() < 1e-8, "{r:?}");
        }
    }
}
