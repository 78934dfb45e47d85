use serde::{Deserialize, Serialize};

use crate::metric::{metric_eval, MetricError, TargetMetric};
use crate::solver::SolutionSurface;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformalReport {
    /// `λ = ⟨∂_x y, ∂_x y⟩` per row and column.
    pub lambda: Vec<Vec<f64>>,
    pub min_lambda: f64,
    /// `max |⟨∂_x y, ∂_t y⟩|`.
    pub max_offdiagonal: f64,
    /// `max |⟨∂_t y, ∂_t y⟩ + λ|`.
    pub max_trace_defect: f64,
}

impl ConformalReport {
    pub fn conformal_within(&self, tol: f64) -> bool {
        self.max_offdiagonal <= tol && self.max_trace_defect <= tol
    }
}

pub fn conformal_factor(m: &dyn TargetMetric, s: &SolutionSurface) -> Result<ConformalReport, MetricError> {
    let mut lambda = Vec::with_capacity(s.n_rows());
    let mut min_lambda = f64::INFINITY;
    let mut off: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for k in 0..s.n_rows() {
        let mut row = Vec::with_capacity(s.n_nodes);
        for j in 0..s.n_nodes {
            let g = metric_eval(m, s.y(k, j))?;
            let yt = s.y_t(k, j);
            let yx = s.y_x(k, j);
            let l = g.inner(&yx, &yx);
            if s.valid(k, j) {
                min_lambda = min_lambda.min(l);
                off = off.max(g.inner(&yx, &yt).abs());
                trace = trace.max((g.inner(&yt, &yt) + l).abs());
            }
            row.push(l);
        }
        lambda.push(row);
    }
    Ok(ConformalReport {
        lambda,
        min_lambda,
        max_offdiagonal: off,
        max_trace_defect: trace,
    })
}
