use serde::{Deserialize, Serialize};

use super::SolutionSurface;
use crate::metric::{christoffel, metric_eval, MetricError, TargetMetric};

/// Flip norm of the discrete wave-map operator at each interior node;
/// `None` where a neighbour is missing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualField {
    pub values: Vec<Vec<Option<f64>>>,
    pub max: f64,
}

/// `y_tt − y_xx + Γ(y)(y_t, y_t) − Γ(y)(y_x, y_x)` by central differences.
pub fn wave_map_residual(m: &dyn TargetMetric, s: &SolutionSurface) -> Result<ResidualField, MetricError> {
    let n = s.dimension;
    let h = s.h;
    let mut values = vec![vec![None; s.n_nodes]; s.n_rows()];
    let mut max: f64 = 0.0;
    for k in 1..s.n_rows().saturating_sub(1) {
        for j in 0..s.n_nodes {
            let (Some(jl), Some(jr)) = (s.neighbor(j, -1), s.neighbor(j, 1)) else {
                continue;
            };
            if !(s.valid(k, j)
                && s.valid(k - 1, j)
                && s.valid(k + 1, j)
                && s.valid(k, jl)
                && s.valid(k, jr))
            {
                continue;
            }
            let y = s.y(k, j);
            let (yn, ys, yw, ye) = (s.y(k + 1, j), s.y(k - 1, j), s.y(k, jl), s.y(k, jr));
            let yt: Vec<f64> = (0..n).map(|a| (yn[a] - ys[a]) / (2.0 * h)).collect();
            let yx: Vec<f64> = (0..n).map(|a| (ye[a] - yw[a]) / (2.0 * h)).collect();
            let g = christoffel(m, y)?;
            let gt = g.contract(&yt, &yt);
            let gx = g.contract(&yx, &yx);
            let r: Vec<f64> = (0..n)
                .map(|a| {
                    (yn[a] - 2.0 * y[a] + ys[a]) / (h * h) - (ye[a] - 2.0 * y[a] + yw[a]) / (h * h)
                        + gt[a]
                        - gx[a]
                })
                .collect();
            let norm = metric_eval(m, y)?.flip_norm(&r);
            max = max.max(norm);
            values[k][j] = Some(norm);
        }
    }
    Ok(ResidualField { values, max })
}
