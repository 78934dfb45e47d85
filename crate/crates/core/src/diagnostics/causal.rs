use serde::{Deserialize, Serialize};

use crate::metric::{metric_eval, MetricError, TargetMetric};
use crate::solver::SolutionSurface;

pub const DEFAULT_TOL_CAUSAL: f64 = 1e-8;
/// A node is degenerate when `‖u − v‖²_h < DEGENERACY_RATIO·‖u + v‖²_h`.
pub const DEGENERACY_RATIO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalKind {
    /// `⟨∂_t y, ∂_t y⟩ > tol`.
    NotCausal,
    /// `(∂_t y)⁰ ≤ 0`.
    PastDirected,
    /// `⟨∂_x y, ∂_x y⟩ < −tol`.
    Timelike,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalViolation {
    pub row: usize,
    pub column: usize,
    pub kind: CausalKind,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalReport {
    pub violations: Vec<CausalViolation>,
    /// Nodes where `u` and `v` (nearly) coincide, so `∂_x y ≈ 0`.
    pub degenerate: Vec<(usize, usize)>,
    pub min_time_component: f64,
}

impl CausalReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn is_degenerate(g: &crate::metric::MetricAt, u: &[f64], v: &[f64]) -> bool {
    let d: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
    let s: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
    g.flip_sq(&d) < DEGENERACY_RATIO * g.flip_sq(&s)
}

/// Checks that `∂_t y` is causal and future-directed and `∂_x y` spacelike
/// or null at every valid node.
pub fn causal_check(m: &dyn TargetMetric, s: &SolutionSurface, tol: f64) -> Result<CausalReport, MetricError> {
    let mut violations = Vec::new();
    let mut degenerate = Vec::new();
    let mut min_time = f64::INFINITY;
    for k in 0..s.n_rows() {
        for j in 0..s.n_nodes {
            if !s.valid(k, j) {
                continue;
            }
            let g = metric_eval(m, s.y(k, j))?;
            let yt = s.y_t(k, j);
            let yx = s.y_x(k, j);
            min_time = min_time.min(yt[0]);
            let tt = g.inner(&yt, &yt);
            if tt > tol {
                violations.push(CausalViolation { row: k, column: j, kind: CausalKind::NotCausal, value: tt });
            }
            if !(yt[0] > 0.0) {
                violations.push(CausalViolation { row: k, column: j, kind: CausalKind::PastDirected, value: yt[0] });
            }
            if is_degenerate(&g, s.u(k, j), s.v(k, j)) {
                degenerate.push((k, j));
                continue;
            }
            let xx = g.inner(&yx, &yx);
            if xx < -tol {
                violations.push(CausalViolation { row: k, column: j, kind: CausalKind::Timelike, value: xx });
            }
        }
    }
    Ok(CausalReport {
        violations,
        degenerate,
        min_time_component: min_time,
    })
}

/// Per row, the smallest `‖u − v‖²_h` over the columns.
pub fn degeneracy_profile(m: &dyn TargetMetric, s: &SolutionSurface) -> Result<Vec<f64>, MetricError> {
    (0..s.n_rows())
        .map(|k| {
            let mut best = f64::INFINITY;
            for j in 0..s.n_nodes {
                let g = metric_eval(m, s.y(k, j))?;
                let d: Vec<f64> = s.u(k, j).iter().zip(s.v(k, j)).map(|(a, b)| a - b).collect();
                best = best.min(g.flip_sq(&d));
            }
            Ok(best)
        })
        .collect()
}

/// Time of the smallest value of a row profile, refined by a parabola
/// through the three rows around it. `None` when the minimum sits on the
/// first or last row.
pub fn locate_minimum(profile: &[f64], times: &[f64]) -> Option<f64> {
    let n = profile.len().min(times.len());
    let k = (0..n).min_by(|&a, &b| profile[a].total_cmp(&profile[b]))?;
    if k == 0 || k + 1 == n {
        return None;
    }
    let (f0, f1, f2) = (profile[k - 1], profile[k], profile[k + 1]);
    let h = 0.5 * (times[k + 1] - times[k - 1]);
    let denom = f0 - 2.0 * f1 + f2;
    let shift = if denom > 0.0 { 0.5 * (f0 - f2) / denom } else { 0.0 };
    Some(times[k] + shift.clamp(-1.0, 1.0) * h)
}
