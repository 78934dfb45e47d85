use std::f64::consts::TAU;

use super::picard::picard_strip_solve;
use super::seed::seed_registry;
use super::{
    strip_estimate, Lattice, SolutionSurface, SolveFailure, SolverError, SolverOptions, StripRecord,
    SurfaceRow,
};
use crate::curve::InitialCurve;
use crate::metric::{metric_eval, TargetMetric, TimeReversed};

/// Allowed decrease of `y⁰` between consecutive rows of a column.
const MONOTONE_SLACK: f64 = 1e-10;

/// Solves strip by strip until every node of the newest row has reached the
/// slice `y⁰ = t_target`.
///
/// The worldsheet is first rescaled to period `2π`; the factor is stored in
/// [`SolutionSurface::scale`]. On failure the rows computed so far travel
/// with the error.
pub fn continue_to_time(
    m: &dyn TargetMetric,
    curve: &InitialCurve,
    t_target: f64,
    opts: &SolverOptions,
) -> Result<SolutionSurface, Box<SolveFailure>> {
    let start = curve
        .k0()
        .iter()
        .map(|p| p[0])
        .fold(f64::NEG_INFINITY, f64::max);
    if !(t_target > start) || !t_target.is_finite() {
        return Err(SolveFailure::new(
            SolverError::PreconditionViolated(format!(
                "target time {t_target} must exceed the initial maximum y⁰ = {start}"
            )),
            None,
        ));
    }
    march(m, curve, opts, |lat| lat.row_min_time(lat.rows() - 1) >= t_target)
}

/// Solves at least `rows` rows above the initial one, regardless of time.
pub fn march_rows(
    m: &dyn TargetMetric,
    curve: &InitialCurve,
    rows: usize,
    opts: &SolverOptions,
) -> Result<SolutionSurface, Box<SolveFailure>> {
    march(m, curve, opts, |lat| lat.rows() > rows)
}

fn march(
    m: &dyn TargetMetric,
    curve: &InitialCurve,
    opts: &SolverOptions,
    done: impl Fn(&Lattice) -> bool,
) -> Result<SolutionSurface, Box<SolveFailure>> {
    let fail = |e: SolverError, lat: Option<&Lattice>, strips: &[StripRecord], scale: f64| {
        let partial = lat.map(|l| {
            let mut s = l.to_surface(m.name());
            s.strips = strips.to_vec();
            s.scale = scale;
            s
        });
        SolveFailure::new(e, partial)
    };
    if curve.dimension() != m.dimension() {
        return Err(fail(
            SolverError::PreconditionViolated(format!(
                "curve lives in dimension {} but the metric in {}",
                curve.dimension(),
                m.dimension()
            )),
            None,
            &[],
            1.0,
        ));
    }
    let (normal, scale) = curve.normalized();
    let data = normal
        .null_decompose(m)
        .map_err(|e| fail(e.into(), None, &[], scale))?;
    let seed = seed_registry()
        .build(&opts.seed, &opts.seed_params)
        .map_err(|e| fail(e.into(), None, &[], scale))?;
    let mut lat = Lattice::new(&data, TAU);
    let mut strips: Vec<StripRecord> = Vec::new();
    if let Err(e) = lat.startup(m) {
        return Err(fail(e, Some(&lat), &strips, scale));
    }
    if let Err(e) = check_monotone(&lat, 1) {
        return Err(fail(e, Some(&lat), &strips, scale));
    }
    let mut starved_run = 0usize;
    while !done(&lat) {
        if lat.rows() > opts.max_rows {
            let e = SolverError::Stalled {
                rows: lat.rows(),
                min_time: lat.row_min_time(lat.rows() - 1),
            };
            return Err(fail(e, Some(&lat), &strips, scale));
        }
        let b = lat.rows() - 1;
        let est = match strip_estimate(
            m,
            &lat.y[b],
            &lat.node_u[b],
            &lat.node_v[b],
            lat.h,
            &opts.delta,
            opts.bound_samples,
            opts.safety_factor,
        ) {
            Ok(e) => e,
            Err(SolverError::DegenerateStrip(_)) => {
                return Err(fail(SolverError::DegenerateStrip(b), Some(&lat), &strips, scale))
            }
            Err(e) => return Err(fail(e, Some(&lat), &strips, scale)),
        };
        if est.starved {
            starved_run += 1;
            if starved_run > opts.starvation_patience {
                let e = SolverError::StepStarvation {
                    row: b,
                    t: b as f64 * lat.h,
                    height: est.l / std::f64::consts::SQRT_2,
                    h: lat.h,
                    g: est.g,
                    strips: starved_run,
                    columns: fastest_columns(m, &lat, b),
                };
                return Err(fail(e, Some(&lat), &strips, scale));
            }
        } else {
            starved_run = 0;
        }
        let fields = seed.seed(&lat, est.n_rows);
        let out = match picard_strip_solve(m, &lat, fields, opts.tol, opts.max_iter) {
            Ok(o) => o,
            Err(e) => return Err(fail(e, Some(&lat), &strips, scale)),
        };
        if let Err(e) = lat.append(m, &out.fields) {
            return Err(fail(e, Some(&lat), &strips, scale));
        }
        strips.push(StripRecord {
            base_row: b,
            rows: est.n_rows,
            starved: est.starved,
            estimate: est,
            iterations: out.state.iterate,
            contraction_ratios: out.state.ratios,
            final_change: out.state.change,
            symmetric_defect: out.state.symmetric_defect,
        });
        for k in b + 1..lat.rows() {
            if let Err(e) = check_monotone(&lat, k) {
                return Err(fail(e, Some(&lat), &strips, scale));
            }
        }
    }
    let mut s = lat.to_surface(m.name());
    s.strips = strips;
    s.scale = scale;
    Ok(s)
}

fn check_monotone(lat: &Lattice, k: usize) -> Result<(), SolverError> {
    let n = lat.n;
    for j in 0..lat.nodes {
        let d = lat.y[k][j * n] - lat.y[k - 1][j * n];
        if d < -MONOTONE_SLACK {
            return Err(SolverError::MonotonicityViolation {
                row: k,
                column: j,
                decrease: -d,
            });
        }
    }
    Ok(())
}

/// Column range where `‖u‖ + ‖v‖` is within 10% of its maximum on row `k`.
fn fastest_columns(m: &dyn TargetMetric, lat: &Lattice, k: usize) -> (usize, usize) {
    let n = lat.n;
    let speeds: Vec<f64> = (0..lat.nodes)
        .map(|j| {
            let s = j * n..(j + 1) * n;
            metric_eval(m, &lat.y[k][s.clone()])
                .map(|g| g.flip_norm(&lat.node_u[k][s.clone()]) + g.flip_norm(&lat.node_v[k][s]))
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    let top = speeds.iter().cloned().fold(0.0, f64::max);
    let hot: Vec<usize> = (0..lat.nodes).filter(|&j| speeds[j] >= 0.9 * top).collect();
    (*hot.first().unwrap_or(&0), *hot.last().unwrap_or(&0))
}

/// Solves backward in time down to the slice `y⁰ = t_target`.
///
/// The problem is mapped to a forward one by the time flip of the target
/// and of the worldsheet, solved with [`continue_to_time`], and mapped back.
/// Rows of the result are ordered by increasing `t ≤ 0`; the initial data
/// form the last row.
pub fn continue_backward(
    m: &dyn TargetMetric,
    curve: &InitialCurve,
    t_target: f64,
    opts: &SolverOptions,
) -> Result<SolutionSurface, Box<SolveFailure>> {
    let start = curve.k0().iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    if !(t_target < start) || !t_target.is_finite() {
        return Err(SolveFailure::new(
            SolverError::PreconditionViolated(format!(
                "backward target {t_target} must lie below the initial minimum y⁰ = {start}"
            )),
            None,
        ));
    }
    let reversed = TimeReversed::new(m);
    let flipped = curve.time_reflected();
    match continue_to_time(&reversed, &flipped, -t_target, opts) {
        Ok(s) => Ok(unflip(s, m.name())),
        Err(mut f) => {
            f.partial = f.partial.take().map(|s| unflip(s, m.name()));
            Err(f)
        }
    }
}

/// `y ↦ Ry`, `u ↦ −Rv`, `v ↦ −Ru`, `t ↦ −t`, rows reversed.
fn unflip(s: SolutionSurface, metric: &str) -> SolutionSurface {
    let n = s.dimension;
    let reflect = |x: &[f64], negate: bool| -> Vec<f64> {
        x.chunks(n)
            .flat_map(|c| {
                c.iter().enumerate().map(move |(i, &a)| {
                    let r = if i == 0 { -a } else { a };
                    if negate {
                        -r
                    } else {
                        r
                    }
                })
            })
            .collect()
    };
    let rows = s
        .rows
        .iter()
        .rev()
        .map(|r| SurfaceRow {
            t: -r.t,
            y: reflect(&r.y, false),
            u: reflect(&r.v, true),
            v: reflect(&r.u, true),
            valid: r.valid.clone(),
        })
        .collect();
    SolutionSurface {
        rows,
        metric: metric.to_string(),
        ..s
    }
}
