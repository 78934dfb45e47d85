use serde::{Deserialize, Serialize};

use crate::metric::{metric_eval, MetricError, TargetMetric};
use crate::solver::SolutionSurface;

/// Largest deviation of `u`, `v` from the light cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullDrift {
    pub max_uu: f64,
    pub max_vv: f64,
    /// Per row: `(max |⟨u,u⟩|, max |⟨v,v⟩|)`.
    pub per_row: Vec<(f64, f64)>,
}

impl NullDrift {
    pub fn max(&self) -> f64 {
        self.max_uu.max(self.max_vv)
    }
}

pub fn null_drift(m: &dyn TargetMetric, s: &SolutionSurface) -> Result<NullDrift, MetricError> {
    let mut per_row = Vec::with_capacity(s.n_rows());
    let (mut mu, mut mv) = (0.0f64, 0.0f64);
    for k in 0..s.n_rows() {
        let (mut ru, mut rv) = (0.0f64, 0.0f64);
        for j in 0..s.n_nodes {
            if !s.valid(k, j) {
                continue;
            }
            let g = metric_eval(m, s.y(k, j))?;
            ru = ru.max(g.inner(s.u(k, j), s.u(k, j)).abs());
            rv = rv.max(g.inner(s.v(k, j), s.v(k, j)).abs());
        }
        mu = mu.max(ru);
        mv = mv.max(rv);
        per_row.push((ru, rv));
    }
    Ok(NullDrift {
        max_uu: mu,
        max_vv: mv,
        per_row,
    })
}
