use serde::{Deserialize, Serialize};

use super::causal::is_degenerate;
use crate::metric::{metric_eval, MetricError, TargetMetric};
use crate::solver::SolutionSurface;

/// Value of an integral over the surface with its bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub value: f64,
    /// Nodes with `u ≈ v`, integrated as 0.
    pub degenerate_nodes: usize,
    /// Non-degenerate nodes whose pulled-back metric is not Lorentzian.
    pub riemannian_nodes: Vec<(usize, usize)>,
}

/// Quadrature weight of row `k`: trapezoid in `t`, uniform in `x`.
fn weight(s: &SolutionSurface, k: usize) -> f64 {
    let last = s.n_rows() - 1;
    let wt = if k == 0 || k == last { 0.5 } else { 1.0 };
    wt * s.h * s.h
}

fn integrate(
    m: &dyn TargetMetric,
    s: &SolutionSurface,
    integrand: impl Fn(f64, f64, f64) -> Option<f64>,
) -> Result<FunctionalValue, MetricError> {
    let mut value = 0.0;
    let mut degenerate_nodes = 0;
    let mut riemannian_nodes = Vec::new();
    if s.n_rows() < 2 {
        return Ok(FunctionalValue { value, degenerate_nodes, riemannian_nodes });
    }
    for k in 0..s.n_rows() {
        let w = weight(s, k);
        let cols = if s.periodic { s.n_nodes } else { s.n_nodes - 1 };
        for j in 0..cols {
            if !s.valid(k, j) {
                continue;
            }
            let g = metric_eval(m, s.y(k, j))?;
            if is_degenerate(&g, s.u(k, j), s.v(k, j)) {
                degenerate_nodes += 1;
                continue;
            }
            let yt = s.y_t(k, j);
            let yx = s.y_x(k, j);
            match integrand(g.inner(&yt, &yt), g.inner(&yt, &yx), g.inner(&yx, &yx)) {
                Some(f) => value += w * f,
                None => riemannian_nodes.push((k, j)),
            }
        }
    }
    Ok(FunctionalValue { value, degenerate_nodes, riemannian_nodes })
}

/// `Σ √(−det y*g)·h²` over the surface.
pub fn area_functional(m: &dyn TargetMetric, s: &SolutionSurface) -> Result<FunctionalValue, MetricError> {
    integrate(m, s, |tt, tx, xx| {
        let det = tt * xx - tx * tx;
        // roundoff-level positive determinants count as null
        let scale = tt.abs() * xx.abs() + tx * tx;
        if det > 1e-12 * scale.max(1e-300) {
            None
        } else {
            Some((-det).max(0.0).sqrt())
        }
    })
}

/// `Σ (⟨∂_x y,∂_x y⟩ − ⟨∂_t y,∂_t y⟩)·h²` over the surface.
pub fn energy_functional(m: &dyn TargetMetric, s: &SolutionSurface) -> Result<FunctionalValue, MetricError> {
    integrate(m, s, |tt, _tx, xx| Some(xx - tt))
}
