//! Single forward or backward runs: data preparation, solve, diagnostics
//! and artifacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use worldsheet::curve::{
    conformalize, curve_registry, derivative_registry, parse_node_file, InitialCurve, Provenance, Violation,
    ViolationKind, DEFAULT_VALIDATE_TOL,
};
use worldsheet::diagnostics::{
    causal_check, degeneracy_profile, null_drift, summarize, time_slice_preimage, DiagnosticsSummary,
};
use worldsheet::export::{write_csv, write_json};
use worldsheet::metric::{metric_eval, TargetMetric};
use worldsheet::solver::{continue_backward, continue_to_time, SolutionSurface, StripRecord};

use crate::config::{to_params, RunConfig, StudyMode, SurfaceFormat};

/// Process outcome, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    InvariantViolation,
    SolverFailure,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::InvariantViolation => 2,
            Outcome::SolverFailure => 3,
        }
    }
}

/// One named check with its measured value and limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    /// Whether a failure changes the exit code. Checks that rely on
    /// conformal data are reported but not enforced for plain wave maps.
    pub enforced: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64, enforced: bool) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
            enforced,
        }
    }

    fn at_least(name: &str, value: f64, limit: f64, enforced: bool) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value >= limit,
            enforced,
        }
    }
}

pub fn outcome_of(checks: &[Check]) -> Outcome {
    if checks.iter().any(|c| c.enforced && !c.passed) {
        Outcome::InvariantViolation
    } else {
        Outcome::Pass
    }
}

pub fn build_metric(cfg: &RunConfig) -> Result<Box<dyn TargetMetric>> {
    cfg.metric.build().context("building the target metric")
}

pub fn build_curve(cfg: &RunConfig, m: &dyn TargetMetric) -> Result<InitialCurve> {
    let scheme = derivative_registry()
        .build(&cfg.curve.derivative, &Default::default())
        .context("choosing the derivative scheme")?;
    let curve = match (&cfg.curve.kind, &cfg.curve.file) {
        (Some(kind), _) => curve_registry()
            .build(kind, &to_params(&cfg.curve.params))
            .context("building the initial curve")?
            .sample(cfg.curve.nodes, m.dimension())
            .context("sampling the initial curve")?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading node file {}", path.display()))?;
            parse_node_file(&text).with_context(|| format!("parsing node file {}", path.display()))?
        }
        (None, None) => anyhow::bail!("curve needs `kind` or `file`"),
    };
    Ok(curve.with_scheme(Arc::from(scheme)))
}

/// Initial data after the optional projection and conformalization.
#[derive(Debug)]
pub struct Prepared {
    pub curve: InitialCurve,
    pub violations: Vec<Violation>,
    pub checks: Vec<Check>,
    /// Whether the solved surface is expected to be conformal.
    pub conformal: bool,
}

impl Prepared {
    pub fn fatal(&self) -> bool {
        self.violations.iter().any(|v| v.kind != ViolationKind::NormCondition)
            || self.checks.iter().any(|c| c.enforced && !c.passed)
    }
}

pub fn prepare(cfg: &RunConfig, m: &dyn TargetMetric) -> Result<Prepared> {
    let mut curve = build_curve(cfg, m)?;
    if cfg.curve.project_velocity {
        curve = curve.orthogonalize_velocity(m).context("projecting the velocity")?;
    }
    let violations = curve.validate(m, DEFAULT_VALIDATE_TOL).context("validating the initial data")?;
    let norm_ok = !violations.iter().any(|v| v.kind == ViolationKind::NormCondition);
    let mut checks = Vec::new();
    let fatal = violations.iter().any(|v| v.kind != ViolationKind::NormCondition);
    let mut conformal = norm_ok;
    if !fatal && cfg.curve.conformalize && curve.provenance() != Provenance::Conformalized {
        curve = conformalize(&curve, m).context("conformalizing the initial data")?;
        conformal = true;
    }
    if !fatal && conformal {
        let nd = curve.null_decompose(m).context("splitting the data into null directions")?;
        let mut worst: f64 = 0.0;
        for j in 0..curve.n_nodes() {
            let g = metric_eval(m, &nd.base[j])?;
            for w in [&nd.u[j], &nd.v[j]] {
                worst = worst.max(g.inner(w, w).abs() / g.flip_sq(w).max(f64::MIN_POSITIVE));
            }
        }
        checks.push(Check::at_most("initial-null-defect", worst, cfg.solver.tol_null, true));
    }
    Ok(Prepared {
        curve,
        violations,
        checks,
        conformal,
    })
}

/// Diagnostics of one surface with pass/fail checks and row profiles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub summary: DiagnosticsSummary,
    pub checks: Vec<Check>,
    pub slice_level: f64,
    pub null_drift_per_row: Vec<(f64, f64)>,
    pub degeneracy_per_row: Vec<f64>,
}

pub fn diagnose(
    cfg: &RunConfig,
    m: &dyn TargetMetric,
    s: &SolutionSurface,
    conformal: bool,
) -> Result<DiagnosticsReport> {
    let summary = summarize(m, s, cfg.solver.tol_causal)?;
    let drift = null_drift(m, s)?;
    let causal = causal_check(m, s, cfg.solver.tol_causal)?;
    let level = cfg.solver.target_time;
    let slice_defect = match time_slice_preimage(s, level) {
        Ok(g) => g.lipschitz_defect,
        Err(_) => f64::INFINITY,
    };
    let checks = vec![
        Check::at_most("null-drift", drift.max(), cfg.solver.tol_drift, conformal),
        Check::at_most("causal-violations", causal.violations.len() as f64, 0.0, conformal),
        Check::at_least("min-conformal-factor", summary.min_lambda, -cfg.solver.tol_causal, conformal),
        Check::at_most("riemannian-nodes", summary.riemannian_nodes as f64, 0.0, conformal),
        Check::at_most("slice-lipschitz-defect", slice_defect, 2.0 * s.h, conformal),
    ];
    Ok(DiagnosticsReport {
        summary,
        checks,
        slice_level: level,
        null_drift_per_row: drift.per_row,
        degeneracy_per_row: degeneracy_profile(m, s)?,
    })
}

/// Everything a run records apart from wall time.
#[derive(Debug, Serialize)]
pub struct RunReport<'a> {
    pub config: &'a RunConfig,
    pub outcome: Outcome,
    pub exit_code: u8,
    pub data_violations: Vec<Violation>,
    pub data_checks: Vec<Check>,
    pub conformal: bool,
    pub error: Option<String>,
    pub rows: usize,
    pub strips: Vec<StripRecord>,
    pub diagnostics: Option<DiagnosticsReport>,
}

pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    use std::io::Write;
    writeln!(w)?;
    Ok(())
}

pub fn write_surface(cfg: &RunConfig, m: &dyn TargetMetric, s: &SolutionSurface, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for f in &cfg.output.formats {
        let path = match f {
            SurfaceFormat::Json => dir.join("surface.json"),
            SurfaceFormat::Csv => dir.join("surface.csv"),
        };
        let out = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        match f {
            SurfaceFormat::Json => write_json(s, out)?,
            SurfaceFormat::Csv => write_csv(m, s, out)?,
        }
        written.push(path);
    }
    Ok(written)
}

pub fn solve(
    cfg: &RunConfig,
    m: &dyn TargetMetric,
    curve: &InitialCurve,
) -> Result<SolutionSurface, Box<worldsheet::solver::SolveFailure>> {
    let opts = cfg.solver.options();
    match cfg.study.mode {
        StudyMode::Backward => continue_backward(m, curve, cfg.solver.target_time, &opts),
        _ => continue_to_time(m, curve, cfg.solver.target_time, &opts),
    }
}

/// Runs the configured single or backward problem and writes its
/// artifacts into `dir`.
pub fn run(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let m = build_metric(cfg)?;
    let prepared = prepare(cfg, m.as_ref())?;
    let mut report = RunReport {
        config: cfg,
        outcome: Outcome::Pass,
        exit_code: 0,
        data_violations: prepared.violations.clone(),
        data_checks: prepared.checks.clone(),
        conformal: prepared.conformal,
        error: None,
        rows: 0,
        strips: Vec::new(),
        diagnostics: None,
    };
    let finish = |mut report: RunReport, outcome: Outcome| -> Result<Outcome> {
        report.outcome = outcome;
        report.exit_code = outcome.exit_code();
        write_json_file(&dir.join("report.json"), &report)?;
        Ok(outcome)
    };
    if prepared.fatal() {
        for v in &prepared.violations {
            eprintln!("data violation: {v}");
        }
        for c in prepared.checks.iter().filter(|c| !c.passed) {
            eprintln!("data check {} failed: {:.3e} > {:.3e}", c.name, c.value, c.limit);
        }
        return finish(report, Outcome::InvariantViolation);
    }
    match solve(cfg, m.as_ref(), &prepared.curve) {
        Ok(s) => {
            write_surface(cfg, m.as_ref(), &s, dir)?;
            let diag = diagnose(cfg, m.as_ref(), &s, prepared.conformal)?;
            write_json_file(&dir.join("diagnostics.json"), &diag)?;
            for c in diag.checks.iter().filter(|c| c.enforced && !c.passed) {
                eprintln!("check {} failed: {:.3e} against limit {:.3e}", c.name, c.value, c.limit);
            }
            let outcome = outcome_of(&diag.checks);
            report.rows = s.n_rows();
            report.strips = s.strips;
            report.diagnostics = Some(diag);
            finish(report, outcome)
        }
        Err(f) => {
            eprintln!("solver failure: {}", f.error);
            report.error = Some(f.error.to_string());
            if let Some(p) = &f.partial {
                write_surface(cfg, m.as_ref(), p, dir)?;
                report.rows = p.n_rows();
                report.strips = p.strips.clone();
            }
            finish(report, Outcome::SolverFailure)
        }
    }
}
