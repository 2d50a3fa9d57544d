//! Command-line front end: `derive`, `simulate` and `verify`.

pub mod config;
pub mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::expr::parse_potential;
use crate::models::{regression_checks, ModelKind, PotentialModel};
use crate::variational::derive_system;
use crate::verify::{run_suite, Check, Suite, DEFAULT_SEED};
use config::{EquationChoice, SimConfig};
use simulate::{simulate, SimError};

pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "gaugeflow", version, about = "Nonlinear Schrödinger potentials, their gauge transforms and simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the derived system of a potential as JSON.
    Derive(DeriveArgs),
    /// Run a simulation from a config file.
    Simulate(SimulateArgs),
    /// Run an acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    /// Built-in model: free, dg, jackiw or eip.
    #[arg(long, conflicts_with = "potential", required_unless_present = "potential")]
    pub model: Option<String>,
    /// Custom potential in the expression language.
    #[arg(long)]
    pub potential: Option<String>,
    /// Parameter value, repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Compare against the stored model expressions; exit 1 on mismatch.
    #[arg(long)]
    pub check_paper: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `output.equation`.
    #[arg(long)]
    pub equation: Option<EquationChoice>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// symbolic, conservation, gauge, linearize, convergence or all.
    pub suite: Suite,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let name = name.trim();
    if name.is_empty() {
        return Err("empty parameter name".into());
    }
    let v: f64 = value.trim().parse().map_err(|e| format!("parameter `{name}`: {e}"))?;
    if !v.is_finite() {
        return Err(format!("parameter `{name}` must be finite"));
    }
    Ok((name.to_string(), v))
}

fn seed() -> u64 {
    std::env::var("GAUGEFLOW_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

pub fn cmd_derive(args: &DeriveArgs) -> ExitCode {
    let model = match (&args.model, &args.potential) {
        (Some(name), _) => match name.parse::<ModelKind>() {
            Ok(kind) => PotentialModel::new(kind),
            Err(e) => return fail(EXIT_CONFIG, e),
        },
        (None, Some(text)) => match parse_potential(text) {
            Ok(u) => PotentialModel::custom(u),
            Err(e) => return fail(EXIT_CONFIG, format!("--potential: {e}")),
        },
        (None, None) => return fail(EXIT_CONFIG, "one of --model or --potential is required"),
    };
    for (name, _) in &args.params {
        if !model.params.contains(name) && name != "hbar" && name != "m" {
            return fail(EXIT_CONFIG, format!("--param {name}: not a parameter of this potential"));
        }
    }
    let ds = match derive_system(&model.u) {
        Ok(ds) => ds,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    println!("{}", ds.to_json_string());
    if !args.check_paper {
        return ExitCode::SUCCESS;
    }
    if model.kind == ModelKind::Custom {
        return fail(EXIT_CONFIG, "--check-paper needs a built-in model");
    }
    let checks = match regression_checks(&model) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let mut ok = true;
    for c in &checks {
        ok &= c.pass;
        let derived = c.derived.as_ref().map_or_else(|| "<none>".to_string(), ToString::to_string);
        eprintln!(
            "{} {} {}: expected {} derived {}",
            if c.pass { "PASS" } else { "FAIL" },
            model.kind,
            c.key,
            c.expected,
            derived
        );
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", args.config.display())),
    };
    let mut cfg = match SimConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Some(eq) = args.equation {
        cfg.output.equation = eq;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.display().to_string();
    }
    let out = PathBuf::from(&cfg.output.dir);
    match simulate(&cfg, &out) {
        Ok(summary) => {
            println!("wrote {} snapshots to {}", summary.snapshots, out.display());
            for f in &summary.files {
                println!("  {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ SimError::Config(_)) => fail(EXIT_CONFIG, e),
        Err(e) => fail(EXIT_RUNTIME, e),
    }
}

fn run_all(seed: u64) -> Vec<Check> {
    let suites = [Suite::Symbolic, Suite::Conservation, Suite::Gauge, Suite::Linearize, Suite::Convergence];
    std::thread::scope(|scope| {
        let handles: Vec<_> = suites.iter().map(|&s| scope.spawn(move || run_suite(s, seed))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("suite thread panicked")).collect()
    })
}

pub fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let seed = seed();
    let checks = if args.suite == Suite::All { run_all(seed) } else { run_suite(args.suite, seed) };
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    println!("{}: {} passed, {failed} failed (seed {seed})", args.suite.name(), checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

pub fn run(cli: &Cli) -> ExitCode {
    match &cli.command {
        Command::Derive(a) => cmd_derive(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
    }
}
