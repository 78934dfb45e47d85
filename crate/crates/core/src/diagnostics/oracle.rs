use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::registry::{bad_param, Params, Registry};
use crate::solver::{SolutionSurface, SurfaceRow};

/// A closed-form wave map into a flat target.
pub trait AnalyticSolution: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn min_dimension(&self) -> usize;
    /// Whether `x ↦ y(x, t)` is `2π`-periodic.
    fn periodic(&self) -> bool {
        true
    }
    /// `(y, ∂_t y, ∂_x y)` at `(x, t)` with `dimension` components.
    fn eval(&self, x: f64, t: f64, dimension: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>);
}

/// Sampling grid for an oracle: `nodes` columns over `[0, 2π)` and `rows`
/// rows starting at `t = 0`, both with spacing `2π/nodes`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub nodes: usize,
    pub rows: usize,
    pub dimension: usize,
}

/// Samples `sol` into a surface comparable with solver output.
pub fn sample_oracle(sol: &dyn AnalyticSolution, grid: OracleGrid) -> Result<SolutionSurface, DiagnosticsError> {
    if grid.dimension < sol.min_dimension() {
        return Err(DiagnosticsError::GridMismatch(format!(
            "oracle `{}` needs dimension at least {}, got {}",
            sol.name(),
            sol.min_dimension(),
            grid.dimension
        )));
    }
    if grid.nodes < 2 {
        return Err(DiagnosticsError::GridMismatch("oracle needs at least two nodes".into()));
    }
    let mut s = SolutionSurface::empty(grid.dimension, grid.nodes, TAU, "minkowski");
    s.periodic = sol.periodic();
    for k in 0..grid.rows {
        let t = k as f64 * s.h;
        let mut row = SurfaceRow {
            t,
            y: Vec::with_capacity(grid.nodes * grid.dimension),
            u: Vec::with_capacity(grid.nodes * grid.dimension),
            v: Vec::with_capacity(grid.nodes * grid.dimension),
            valid: vec![true; grid.nodes],
        };
        for j in 0..grid.nodes {
            let (y, yt, yx) = sol.eval(s.x(j), t, grid.dimension);
            row.y.extend(y);
            row.u.extend(yt.iter().zip(&yx).map(|(a, b)| a + b));
            row.v.extend(yt.iter().zip(&yx).map(|(a, b)| a - b));
        }
        s.rows.push(row);
    }
    Ok(s)
}

/// `y = (t, r cos t sin x, r cos t cos x)`: the circle of radius `r` at
/// rest, collapsing to a point at `t = π/2`. A wave map for every `r`,
/// conformal only for `r = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapsingCircle {
    pub radius: f64,
}

impl AnalyticSolution for CollapsingCircle {
    fn name(&self) -> &str {
        "minkowski-circle"
    }

    fn min_dimension(&self) -> usize {
        3
    }

    fn eval(&self, x: f64, t: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let r = self.radius;
        let mut y = vec![0.0; n];
        let mut yt = vec![0.0; n];
        let mut yx = vec![0.0; n];
        y[0] = t;
        y[1] = r * t.cos() * x.sin();
        y[2] = r * t.cos() * x.cos();
        yt[0] = 1.0;
        yt[1] = -r * t.sin() * x.sin();
        yt[2] = -r * t.sin() * x.cos();
        yx[1] = r * t.cos() * x.cos();
        yx[2] = -r * t.cos() * x.sin();
        (y, yt, yx)
    }
}

/// `y = (t, x, 0, …)`: the flat sheet, not closed.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSheet;

impl AnalyticSolution for FlatSheet {
    fn name(&self) -> &str {
        "flat-linear"
    }

    fn min_dimension(&self) -> usize {
        2
    }

    fn periodic(&self) -> bool {
        false
    }

    fn eval(&self, x: f64, t: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut y = vec![0.0; n];
        let mut yt = vec![0.0; n];
        let mut yx = vec![0.0; n];
        y[0] = t;
        y[1] = x;
        yt[0] = 1.0;
        yx[1] = 1.0;
        (y, yt, yx)
    }
}

/// `y = (t, f(x − t))` for a unit-speed closed plane curve `f`; a wave map
/// that is not conformal.
#[derive(Clone, Debug, PartialEq)]
pub struct TravellingWave {
    /// Winding number of `f(s) = (cos ms, sin ms)/m`.
    pub mode: u32,
}

impl AnalyticSolution for TravellingWave {
    fn name(&self) -> &str {
        "flat-travelling-wave"
    }

    fn min_dimension(&self) -> usize {
        3
    }

    fn eval(&self, x: f64, t: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.mode as f64;
        let s = m * (x - t);
        let mut y = vec![0.0; n];
        let mut yt = vec![0.0; n];
        let mut yx = vec![0.0; n];
        y[0] = t;
        y[1] = s.cos() / m;
        y[2] = s.sin() / m;
        yt[0] = 1.0;
        yt[1] = s.sin();
        yt[2] = -s.cos();
        yx[1] = -s.sin();
        yx[2] = s.cos();
        (y, yt, yx)
    }
}

/// Closed-form solutions by name.
///
/// * `minkowski-circle`: `radius` (1).
/// * `flat-linear`: no parameters.
/// * `flat-travelling-wave`: `profile` (`circle` or `harmonic2`).
pub fn oracle_registry() -> Registry<dyn AnalyticSolution> {
    let mut reg: Registry<dyn AnalyticSolution> = Registry::new("oracle");
    reg.register("minkowski-circle", |p: &Params| {
        let radius = p.number("radius").unwrap_or(1.0);
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(bad_param("oracle", "minkowski-circle", "radius", "must be positive"));
        }
        Ok(Box::new(CollapsingCircle { radius }))
    });
    reg.register("flat-linear", |_| Ok(Box::new(FlatSheet)));
    reg.register("flat-travelling-wave", |p: &Params| {
        let mode = match p.text("profile").unwrap_or("circle") {
            "circle" => 1,
            "harmonic2" => 2,
            other => {
                return Err(bad_param(
                    "oracle",
                    "flat-travelling-wave",
                    "profile",
                    format!("unknown profile `{other}` (known: circle, harmonic2)"),
                ))
            }
        };
        Ok(Box::new(TravellingWave { mode }))
    });
    reg
}
