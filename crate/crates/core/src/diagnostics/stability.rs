use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::solver::SolutionSurface;

/// Growth of the difference of two surfaces on the same grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `E(s) = Σ_j (|V_x|² + |V_t|² + |V|²)·h` per row, `V = y₁ − y₂`.
    pub energy: Vec<f64>,
    /// Least-squares slope of `ln E` against `s`.
    pub fitted_rate: Option<f64>,
    /// `max_k ln(E(s_k)/E(0))/s_k`; `None` when `E(0)` vanishes.
    pub empirical_constant: Option<f64>,
    /// For coinciding initial data: whether `E` stays below the floor.
    pub within_floor: Option<bool>,
}

/// `tol` is the Picard tolerance both runs used; it sets the noise floor
/// `100·tol²·N` for runs from identical data.
pub fn energy_stability(
    a: &SolutionSurface,
    b: &SolutionSurface,
    tol: f64,
) -> Result<StabilityReport, DiagnosticsError> {
    if a.n_nodes != b.n_nodes || a.dimension != b.dimension || (a.h - b.h).abs() > 1e-12 * a.h {
        return Err(DiagnosticsError::GridMismatch(format!(
            "{}x{} nodes with h = {} against {}x{} with h = {}",
            a.n_nodes, a.dimension, a.h, b.n_nodes, b.dimension, b.h
        )));
    }
    let rows = a.n_rows().min(b.n_rows());
    if rows < 2 {
        return Err(DiagnosticsError::EmptySurface);
    }
    let n = a.dimension;
    let h = a.h;
    let diff = |k: usize, j: usize| -> Vec<f64> { a.y(k, j).iter().zip(b.y(k, j)).map(|(p, q)| p - q).collect() };

    let mut energy = Vec::with_capacity(rows);
    for k in 0..rows {
        let mut e = 0.0;
        for j in 0..a.n_nodes {
            let vv = diff(k, j);
            let vx = match (a.neighbor(j, -1), a.neighbor(j, 1)) {
                (Some(l), Some(r)) => {
                    let (dl, dr) = (diff(k, l), diff(k, r));
                    (0..n).map(|i| (dr[i] - dl[i]) / (2.0 * h)).collect()
                }
                (None, Some(r)) => {
                    let dr = diff(k, r);
                    (0..n).map(|i| (dr[i] - vv[i]) / h).collect()
                }
                (Some(l), None) => {
                    let dl = diff(k, l);
                    (0..n).map(|i| (vv[i] - dl[i]) / h).collect()
                }
                (None, None) => vec![0.0; n],
            };
            let vt: Vec<f64> = if k == 0 {
                let up = diff(1, j);
                (0..n).map(|i| (up[i] - vv[i]) / (a.t(1) - a.t(0))).collect()
            } else if k == rows - 1 {
                let dn = diff(k - 1, j);
                (0..n).map(|i| (vv[i] - dn[i]) / (a.t(k) - a.t(k - 1))).collect()
            } else {
                let (up, dn) = (diff(k + 1, j), diff(k - 1, j));
                (0..n).map(|i| (up[i] - dn[i]) / (a.t(k + 1) - a.t(k - 1))).collect()
            };
            e += (0..n).map(|i| vx[i] * vx[i] + vt[i] * vt[i] + vv[i] * vv[i]).sum::<f64>() * h;
        }
        energy.push(e);
    }
    let times: Vec<f64> = (0..rows).map(|k| a.t(k) - a.t(0)).collect();

    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&energy)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    let fitted_rate = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let st: f64 = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let sl: f64 = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let num: f64 = pts.iter().map(|p| (p.0 - st) * (p.1 - sl)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - st).powi(2)).sum();
        (den > 0.0).then(|| num / den)
    } else {
        None
    };

    let floor = 100.0 * tol * tol * a.n_nodes as f64;
    let coincide = (0..a.n_nodes).all(|j| a.y(0, j) == b.y(0, j) && a.u(0, j) == b.u(0, j) && a.v(0, j) == b.v(0, j));
    let (empirical_constant, within_floor) = if coincide {
        (None, Some(energy.iter().all(|&e| e <= floor)))
    } else if energy[0] > 0.0 {
        let k = (1..rows)
            .filter(|&k| times[k] > 0.0 && energy[k] > 0.0)
            .map(|k| (energy[k] / energy[0]).ln() / times[k])
            .fold(f64::NEG_INFINITY, f64::max);
        (k.is_finite().then_some(k), None)
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        times,
        energy,
        fitted_rate,
        empirical_constant,
        within_floor,
    })
}
