use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::solver::SolutionSurface;

/// The level set `{y⁰ = T}` written as a graph `t = f(x)` over the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceGraph {
    pub level: f64,
    pub f: Vec<f64>,
    /// `max_j max(0, |f_{j+1} − f_j|/h − 1)`.
    pub lipschitz_defect: f64,
}

/// Linear interpolation of the first crossing of `y⁰ = level` in each
/// column. Every column must cross within the computed rows.
pub fn time_slice_preimage(s: &SolutionSurface, level: f64) -> Result<SliceGraph, DiagnosticsError> {
    if s.n_rows() == 0 {
        return Err(DiagnosticsError::EmptySurface);
    }
    let mut f = Vec::with_capacity(s.n_nodes);
    for j in 0..s.n_nodes {
        let first = s.y(0, j)[0];
        if level < first {
            return Err(DiagnosticsError::SliceMiss {
                column: j,
                level,
                reached: first,
            });
        }
        let mut found = None;
        for k in 0..s.n_rows() - 1 {
            let a = s.y(k, j)[0];
            let b = s.y(k + 1, j)[0];
            if a <= level && level <= b {
                let frac = if b > a { (level - a) / (b - a) } else { 0.0 };
                found = Some(s.t(k) + frac * (s.t(k + 1) - s.t(k)));
                break;
            }
        }
        match found {
            Some(v) => f.push(v),
            None if s.y(s.n_rows() - 1, j)[0] == level => f.push(s.t(s.n_rows() - 1)),
            None => {
                return Err(DiagnosticsError::SliceMiss {
                    column: j,
                    level,
                    reached: s.y(s.n_rows() - 1, j)[0],
                })
            }
        }
    }
    let mut defect: f64 = 0.0;
    for j in 0..s.n_nodes {
        if let Some(jn) = s.neighbor(j, 1) {
            defect = defect.max((f[jn] - f[j]).abs() / s.h - 1.0);
        }
    }
    Ok(SliceGraph {
        level,
        f,
        lipschitz_defect: defect.max(0.0),
    })
}
