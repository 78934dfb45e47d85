//! Convergence and stability studies over several runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use worldsheet::diagnostics::{energy_stability, null_drift, oracle_registry, sample_oracle, OracleGrid, StabilityReport};
use worldsheet::metric::{metric_eval, TargetMetric};
use worldsheet::solver::SolutionSurface;

use crate::config::{to_params, ParamEntry, RunConfig, StudyMode};
use crate::run::{build_metric, prepare, solve, write_json_file, Outcome};

/// Errors below this count as exact.
pub const EXACT_BELOW: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub nodes: usize,
    pub h: f64,
    pub error: Option<f64>,
    pub null_drift: f64,
}

/// Observed order between consecutive values: `None` for the first row,
/// `Some(None)` when both are at the exact floor.
pub fn orders(values: &[Option<f64>]) -> Vec<Option<Option<f64>>> {
    let mut out = vec![None];
    for w in values.windows(2) {
        out.push(match (w[0], w[1]) {
            (Some(a), Some(b)) if a < EXACT_BELOW && b < EXACT_BELOW => Some(None),
            (Some(a), Some(b)) if b > 0.0 => Some(Some((a / b).log2())),
            _ => None,
        });
    }
    out
}

/// Whether the errors decrease level to level, ignoring the exact floor.
pub fn monotone(values: &[Option<f64>]) -> bool {
    values.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => b <= a || b < EXACT_BELOW,
        _ => true,
    })
}

fn fmt_order(o: &Option<Option<f64>>) -> String {
    match o {
        None => "-".into(),
        Some(None) => "exact".into(),
        Some(Some(p)) => format!("{p:.3}"),
    }
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.6e}"))
}

/// Tab-separated table with one row per level.
pub fn convergence_table(levels: &[Level]) -> String {
    let errors: Vec<Option<f64>> = levels.iter().map(|l| l.error).collect();
    let drifts: Vec<Option<f64>> = levels.iter().map(|l| Some(l.null_drift)).collect();
    let (eo, dor) = (orders(&errors), orders(&drifts));
    let mut out = String::from("nodes\th\terror\terror_order\tnull_drift\tdrift_order\n");
    for (i, l) in levels.iter().enumerate() {
        writeln!(
            out,
            "{}\t{:.6e}\t{}\t{}\t{:.6e}\t{}",
            l.nodes,
            l.h,
            fmt_value(l.error),
            fmt_order(&eo[i]),
            l.null_drift,
            fmt_order(&dor[i])
        )
        .expect("string write");
    }
    out
}

/// Largest flip-norm difference between a coarse surface and every second
/// node of a surface with half the spacing.
fn coarse_fine_difference(m: &dyn TargetMetric, coarse: &SolutionSurface, fine: &SolutionSurface) -> Result<f64> {
    if fine.n_nodes != 2 * coarse.n_nodes {
        bail!("levels must double the node count");
    }
    let rows = coarse.n_rows().min((fine.n_rows() + 1) / 2);
    let mut worst: f64 = 0.0;
    for k in 0..rows {
        for j in 0..coarse.n_nodes {
            let a = coarse.y(k, j);
            let b = fine.y(2 * k, 2 * j);
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            worst = worst.max(metric_eval(m, a)?.flip_norm(&d));
        }
    }
    Ok(worst)
}

fn solve_level(cfg: &RunConfig, m: &dyn TargetMetric) -> Result<Result<SolutionSurface, Outcome>> {
    let prepared = prepare(cfg, m)?;
    if prepared.fatal() {
        for v in &prepared.violations {
            eprintln!("data violation: {v}");
        }
        return Ok(Err(Outcome::InvariantViolation));
    }
    match solve(cfg, m, &prepared.curve) {
        Ok(s) => Ok(Ok(s)),
        Err(f) => {
            eprintln!("solver failure at N = {}: {}", cfg.curve.nodes, f.error);
            Ok(Err(Outcome::SolverFailure))
        }
    }
}

#[derive(Debug, Serialize)]
struct ConvergenceReport<'a> {
    config: &'a RunConfig,
    reference: String,
    levels: Vec<Level>,
    monotone: bool,
    outcome: Outcome,
}

pub fn convergence(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let m = build_metric(cfg)?;
    let oracle = match &cfg.study.oracle {
        Some(name) => Some(
            oracle_registry()
                .build(name, &to_params(&cfg.study.oracle_params))
                .context("building the reference solution")?,
        ),
        None => None,
    };
    let mut surfaces = Vec::new();
    for i in 0..cfg.study.levels {
        let mut c = cfg.clone();
        c.curve.nodes = cfg.curve.nodes << i;
        match solve_level(&c, m.as_ref())? {
            Ok(s) => surfaces.push(s),
            Err(outcome) => return Ok(outcome),
        }
    }
    let mut levels = Vec::new();
    for (i, s) in surfaces.iter().enumerate() {
        let error = match &oracle {
            Some(o) => {
                if (s.scale - 1.0).abs() > 1e-12 {
                    bail!("oracle comparison needs a string of length 2π (rescale factor {})", s.scale);
                }
                let exact = sample_oracle(
                    o.as_ref(),
                    OracleGrid {
                        nodes: s.n_nodes,
                        rows: s.n_rows(),
                        dimension: s.dimension,
                    },
                )?;
                Some(s.max_difference(&exact, m.as_ref())?)
            }
            None => match surfaces.get(i + 1) {
                Some(fine) => Some(coarse_fine_difference(m.as_ref(), s, fine)?),
                None => None,
            },
        };
        levels.push(Level {
            nodes: s.n_nodes,
            h: s.h,
            error,
            null_drift: null_drift(m.as_ref(), s)?.max(),
        });
    }
    let table = convergence_table(&levels);
    fs::write(dir.join("convergence.tsv"), &table)?;
    print!("{table}");
    let errors: Vec<Option<f64>> = levels.iter().map(|l| l.error).collect();
    let mono = monotone(&errors);
    if !mono {
        eprintln!("error does not decrease monotonically under refinement");
    }
    let outcome = if mono { Outcome::Pass } else { Outcome::InvariantViolation };
    let reference = match &cfg.study.oracle {
        Some(name) => format!("oracle {name}"),
        None => "next finer level".into(),
    };
    write_json_file(
        &dir.join("study.json"),
        &ConvergenceReport {
            config: cfg,
            reference,
            levels,
            monotone: mono,
            outcome,
        },
    )?;
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct Perturbation {
    epsilon: f64,
    report: StabilityReport,
}

#[derive(Debug, Serialize)]
struct StabilityStudy<'a> {
    config: &'a RunConfig,
    runs: Vec<Perturbation>,
    /// `E(0)` ratio against `(ε_i/ε_{i+1})²` for consecutive amplitudes.
    initial_energy_scaling: Vec<f64>,
    /// Relative spread of the fitted rates.
    rate_spread: Option<f64>,
    outcome: Outcome,
}

/// Perturbed data are not conformal, so every run of the study is a plain
/// wave map on the data as given.
pub fn stability(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let m = build_metric(cfg)?;
    let mut cfg = cfg.clone();
    cfg.curve.conformalize = false;
    let cfg = &cfg;
    let base = match solve_level(cfg, m.as_ref())? {
        Ok(s) => s,
        Err(outcome) => return Ok(outcome),
    };
    let mut runs = Vec::new();
    for &eps in &cfg.study.epsilons {
        let mut c = cfg.clone();
        c.curve.params.insert("epsilon".into(), ParamEntry::Number(eps));
        let s = match solve_level(&c, m.as_ref())? {
            Ok(s) => s,
            Err(outcome) => return Ok(outcome),
        };
        runs.push(Perturbation {
            epsilon: eps,
            report: energy_stability(&s, &base, cfg.solver.tol)?,
        });
    }
    let scaling: Vec<f64> = runs
        .windows(2)
        .map(|w| {
            let expect = (w[0].epsilon / w[1].epsilon).powi(2);
            w[0].report.energy[0] / w[1].report.energy[0] / expect
        })
        .collect();
    let rates: Vec<f64> = runs.iter().filter_map(|r| r.report.fitted_rate).collect();
    let rate_spread = if rates.len() == runs.len() && rates.len() >= 2 {
        let hi = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let scale = hi.abs().max(lo.abs());
        Some(if scale > 0.0 { (hi - lo) / scale } else { 0.0 })
    } else {
        None
    };
    let ok = scaling.iter().all(|r| (r - 1.0).abs() <= 0.1) && rate_spread.is_none_or(|s| s <= 0.2);
    let outcome = if ok { Outcome::Pass } else { Outcome::InvariantViolation };
    for r in &runs {
        println!(
            "epsilon {:.3e}\tE(0) {:.6e}\trate {}",
            r.epsilon,
            r.report.energy[0],
            r.report.fitted_rate.map_or("-".into(), |k| format!("{k:.6}"))
        );
    }
    write_json_file(
        &dir.join("study.json"),
        &StabilityStudy {
            config: cfg,
            runs,
            initial_energy_scaling: scaling,
            rate_spread,
            outcome,
        },
    )?;
    Ok(outcome)
}

pub fn study(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    match cfg.study.mode {
        StudyMode::Convergence => convergence(cfg, dir),
        StudyMode::Stability => stability(cfg, dir),
        other => bail!("study needs mode `convergence` or `stability`, config has {other:?}; use `run`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(nodes: usize, error: Option<f64>, drift: f64) -> Level {
        Level {
            nodes,
            h: std::f64::consts::TAU / nodes as f64,
            error,
            null_drift: drift,
        }
    }

    #[test]
    fn orders_and_exact_marks() {
        let levels = [
            level(64, Some(4e-3), 1e-16),
            level(128, Some(1e-3), 2e-16),
            level(256, Some(2.5e-4), 1e-16),
        ];
        let t = convergence_table(&levels);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "nodes\th\terror\terror_order\tnull_drift\tdrift_order");
        assert!(lines[2].contains("\t2.000\t"));
        assert!(lines[2].ends_with("exact"));
        assert!(lines[1].ends_with("\t-"));
    }

    #[test]
    fn non_monotone_errors_are_flagged() {
        assert!(monotone(&[Some(1e-2), Some(3e-3), Some(1e-3)]));
        assert!(!monotone(&[Some(1e-2), Some(3e-2)]));
        assert!(monotone(&[Some(1e-14), Some(2e-14)]));
        assert!(monotone(&[Some(1e-2), None]));
    }
}
