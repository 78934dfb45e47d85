//! `worldsheet`: config-driven runs of the characteristic solver.
//!
//! Exit codes: 0 all checks pass, 1 configuration or usage error,
//! 2 invariant violation, 3 solver failure.

mod config;
mod run;
mod study;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use worldsheet::diagnostics::{oracle_registry, sample_oracle, OracleGrid};
use worldsheet::export::{write_csv, write_json};
use worldsheet::metric::Minkowski;
use worldsheet::Params;

use config::{RunConfig, StudyMode, SurfaceFormat};
use run::Outcome;

#[derive(Parser, Debug)]
#[command(name = "worldsheet", version, about = "Minimal Lorentzian surfaces by characteristic transport")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem (forward, or backward with mode = backward).
    Run(RunArgs),
    /// Convergence or stability study over several runs.
    Study(RunArgs),
    /// Check the initial data without solving.
    ValidateOnly(RunArgs),
    /// Dump a closed-form solution on a grid.
    Oracle(OracleArgs),
}

/// Flags override the values in the config file.
#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    #[arg(long, env = "WORLDSHEET_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    target_time: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tol_null: Option<f64>,
    #[arg(long)]
    tol_causal: Option<f64>,
    #[arg(long)]
    tol_drift: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<StudyMode>,
    #[arg(long)]
    levels: Option<usize>,
    /// Surface formats to write (repeatable).
    #[arg(long = "format", value_enum)]
    formats: Vec<SurfaceFormat>,
    /// Remove the tangential part of the velocity before validation.
    #[arg(long)]
    project_velocity: bool,
    /// Solve the data as given, without conformal reparametrization.
    #[arg(long)]
    no_conformalize: bool,
}

impl RunArgs {
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(d) = &self.output_dir {
            cfg.output.dir = d.clone();
        } else if cfg.output.dir.is_relative() {
            if let Some(parent) = self.config.parent() {
                cfg.output.dir = parent.join(&cfg.output.dir);
            }
        }
        if let Some(n) = self.nodes {
            cfg.curve.nodes = n;
        }
        if let Some(t) = self.target_time {
            cfg.solver.target_time = t;
        }
        if let Some(x) = self.tol {
            cfg.solver.tol = x;
        }
        if let Some(x) = self.tol_null {
            cfg.solver.tol_null = x;
        }
        if let Some(x) = self.tol_causal {
            cfg.solver.tol_causal = x;
        }
        if let Some(x) = self.tol_drift {
            cfg.solver.tol_drift = x;
        }
        if let Some(x) = self.max_iter {
            cfg.solver.max_iter = x;
        }
        if let Some(m) = self.mode {
            cfg.study.mode = m;
        }
        if let Some(l) = self.levels {
            cfg.study.levels = l;
        }
        if !self.formats.is_empty() {
            cfg.output.formats = self.formats.clone();
        }
        if self.project_velocity {
            cfg.curve.project_velocity = true;
        }
        if self.no_conformalize {
            cfg.curve.conformalize = false;
        }
        cfg.validate()?;
        let dir = cfg.output.dir.clone();
        Ok((cfg, dir))
    }
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Catalog id: minkowski-circle, flat-linear, flat-travelling-wave.
    name: String,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    #[arg(long, default_value_t = 16)]
    rows: usize,
    #[arg(long, default_value_t = 3)]
    dimension: usize,
    /// Parameter as `key=value`, numeric or text (repeatable).
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, String)>,
    #[arg(long, value_enum, default_value = "json")]
    format: SurfaceFormat,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

fn write_timing(dir: &Path, seconds: f64) -> Result<()> {
    let text = serde_json::to_string_pretty(&serde_json::json!({ "wall_seconds": seconds }))?;
    std::fs::write(dir.join("timing.json"), text + "\n").context("writing timing.json")
}

fn run_command(args: &RunArgs) -> Result<Outcome> {
    let (cfg, dir) = args.load()?;
    if !matches!(cfg.study.mode, StudyMode::Single | StudyMode::Backward) {
        bail!("mode {:?} is a study; use `worldsheet study`", cfg.study.mode);
    }
    let start = Instant::now();
    let outcome = run::run(&cfg, &dir)?;
    write_timing(&dir, start.elapsed().as_secs_f64())?;
    Ok(outcome)
}

fn study_command(args: &RunArgs) -> Result<Outcome> {
    let (cfg, dir) = args.load()?;
    let start = Instant::now();
    let outcome = study::study(&cfg, &dir)?;
    write_timing(&dir, start.elapsed().as_secs_f64())?;
    Ok(outcome)
}

fn validate_command(args: &RunArgs) -> Result<Outcome> {
    let (cfg, _) = args.load()?;
    let m = run::build_metric(&cfg)?;
    let prepared = run::prepare(&cfg, m.as_ref())?;
    for v in &prepared.violations {
        println!("violation: {v}");
    }
    for c in &prepared.checks {
        println!(
            "{} {}: {:.3e} (limit {:.3e})",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    if prepared.fatal() {
        Ok(Outcome::InvariantViolation)
    } else {
        println!(
            "initial data admissible ({} nodes, {})",
            prepared.curve.n_nodes(),
            if prepared.conformal { "conformal" } else { "plain wave map" }
        );
        Ok(Outcome::Pass)
    }
}

fn oracle_command(args: &OracleArgs) -> Result<Outcome> {
    let mut params = Params::new();
    for (k, v) in &args.params {
        match v.parse::<f64>() {
            Ok(x) => params.insert(k, x),
            Err(_) => params.insert(k, v.as_str()),
        }
    }
    let o = oracle_registry().build(&args.name, &params)?;
    let s = sample_oracle(
        o.as_ref(),
        OracleGrid {
            nodes: args.nodes,
            rows: args.rows,
            dimension: args.dimension,
        },
    )?;
    let m = Minkowski::new(args.dimension);
    let mut out: Box<dyn std::io::Write> = match &args.out {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        SurfaceFormat::Json => {
            write_json(&s, &mut out)?;
            writeln!(out)?;
        }
        SurfaceFormat::Csv => write_csv(&m, &s, &mut out)?,
    }
    out.flush()?;
    Ok(Outcome::Pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run_command(a),
        Command::Study(a) => study_command(a),
        Command::ValidateOnly(a) => validate_command(a),
        Command::Oracle(a) => oracle_command(a),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
