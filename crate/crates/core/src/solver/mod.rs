//! Null-lattice discretization of the doubled characteristic system and
//! its strip-by-strip Picard solution.
//!
//! Nodes sit at `(x_j, t_k) = (jh, kh)`. A ξ-edge runs from `(j,k)` to
//! `(j+1,k+1)` and carries `u = ∂_ξ y`; an η-edge runs from `(j,k)` to
//! `(j−1,k+1)` and carries `v = ∂_η y`. Every interior node is the top of a
//! diamond whose two lower edges are known; the two upper edges are obtained
//! by transporting the lower ones across the diamond and the top node by
//! integrating an upper edge.

mod continuation;
mod estimate;
mod lattice;
mod picard;
mod residual;
mod seed;
mod transport;

pub use continuation::{continue_backward, continue_to_time, march_rows};
pub use estimate::{c1_bounds, strip_estimate, DeltaPolicy, StepEstimate};
pub use lattice::{Lattice, StripFields};
pub use picard::{picard_strip_solve, sweep, symmetric_defect, PicardState, StripOutcome};
pub use residual::{wave_map_residual, ResidualField};
pub use seed::{seed_registry, ConstantExtension, PerturbedSeed, PicardSeed};
pub use transport::{transport_implicit, transport_step};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::CurveError;
use crate::metric::{metric_eval, MetricError, TargetMetric};
use crate::registry::{Params, RegistryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("step starvation at row {row} (t = {t:.6}): strip height l/√2 = {height:.3e} below h = {h:.3e} for {strips} consecutive strips (G = {g:.3e}, columns {columns:?})")]
    StepStarvation {
        row: usize,
        t: f64,
        height: f64,
        h: f64,
        g: f64,
        strips: usize,
        columns: (usize, usize),
    },
    #[error("blow-up: non-finite values at row {row}, column {column}")]
    BlowUp { row: usize, column: usize },
    #[error("Picard iteration did not converge on the strip above row {row} after {iterations} sweeps (last change {last_change:.3e}, last ratio {ratio:.3})")]
    NonConvergence {
        row: usize,
        iterations: usize,
        last_change: f64,
        ratio: f64,
    },
    #[error("time function decreases by {decrease:.3e} along column {column} at row {row}")]
    MonotonicityViolation {
        row: usize,
        column: usize,
        decrease: f64,
    },
    #[error("cannot size a strip at row {0}: u̲ + v̲ = 0")]
    DegenerateStrip(usize),
    #[error("surface stalled: {rows} rows computed, newest row reaches only y⁰ = {min_time:.6}")]
    Stalled { rows: usize, min_time: f64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// A solver error together with whatever surface was computed before it.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct SolveFailure {
    pub error: SolverError,
    pub partial: Option<SolutionSurface>,
}

impl SolveFailure {
    pub fn new(error: SolverError, partial: Option<SolutionSurface>) -> Box<Self> {
        Box::new(Self { error, partial })
    }
}

/// Knobs for [`continue_to_time`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Picard stopping threshold on the sup flip-norm change.
    pub tol: f64,
    pub max_iter: usize,
    pub delta: DeltaPolicy,
    /// Halton samples per strip for the Christoffel bound.
    pub bound_samples: usize,
    pub safety_factor: f64,
    /// Consecutive starved strips tolerated before giving up.
    pub starvation_patience: usize,
    pub max_rows: usize,
    /// Picard seed strategy name and parameters.
    pub seed: String,
    #[serde(skip)]
    pub seed_params: Params,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            delta: DeltaPolicy::default(),
            bound_samples: 64,
            safety_factor: crate::metric::DEFAULT_SAFETY_FACTOR,
            starvation_patience: 3,
            max_rows: 200_000,
            seed: "constant-extension".into(),
            seed_params: Params::new(),
        }
    }
}

/// Log entry for one strip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripRecord {
    /// Row the strip was built on.
    pub base_row: usize,
    pub estimate: StepEstimate,
    pub rows: usize,
    pub iterations: usize,
    pub contraction_ratios: Vec<f64>,
    pub final_change: f64,
    /// Largest flip norm of `y − z`, `u − û`, `v − v̂` before collapse.
    pub symmetric_defect: f64,
    pub starved: bool,
}

/// One time row of a surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub t: f64,
    /// Node positions, `N·n` values, node-major.
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub valid: Vec<bool>,
}

/// Sampled worldsheet `y` with its characteristic derivatives on a
/// uniform `(x, t)` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSurface {
    pub dimension: usize,
    pub n_nodes: usize,
    pub period: f64,
    pub h: f64,
    /// Worldsheet coordinates were divided by this factor to make the
    /// period `2π`.
    pub scale: f64,
    /// Whether columns wrap around (false only for non-closed oracles).
    pub periodic: bool,
    pub metric: String,
    pub rows: Vec<SurfaceRow>,
    pub strips: Vec<StripRecord>,
}

impl SolutionSurface {
    pub fn empty(dimension: usize, n_nodes: usize, period: f64, metric: &str) -> Self {
        Self {
            dimension,
            n_nodes,
            period,
            h: period / n_nodes as f64,
            scale: 1.0,
            periodic: true,
            metric: metric.to_string(),
            rows: Vec::new(),
            strips: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// The first `rows` rows, with strip records that end within them.
    pub fn truncated(&self, rows: usize) -> Self {
        let rows = rows.min(self.n_rows());
        Self {
            rows: self.rows[..rows].to_vec(),
            strips: self
                .strips
                .iter()
                .filter(|r| r.base_row + r.rows < rows)
                .cloned()
                .collect(),
            metric: self.metric.clone(),
            ..*self
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn t(&self, k: usize) -> f64 {
        self.rows[k].t
    }

    pub fn y(&self, k: usize, j: usize) -> &[f64] {
        let n = self.dimension;
        &self.rows[k].y[j * n..(j + 1) * n]
    }

    pub fn u(&self, k: usize, j: usize) -> &[f64] {
        let n = self.dimension;
        &self.rows[k].u[j * n..(j + 1) * n]
    }

    pub fn v(&self, k: usize, j: usize) -> &[f64] {
        let n = self.dimension;
        &self.rows[k].v[j * n..(j + 1) * n]
    }

    pub fn valid(&self, k: usize, j: usize) -> bool {
        self.rows[k].valid[j]
    }

    /// `∂_t y = ½(u + v)` at a node.
    pub fn y_t(&self, k: usize, j: usize) -> Vec<f64> {
        self.u(k, j).iter().zip(self.v(k, j)).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// `∂_x y = ½(u − v)` at a node.
    pub fn y_x(&self, k: usize, j: usize) -> Vec<f64> {
        self.u(k, j).iter().zip(self.v(k, j)).map(|(a, b)| 0.5 * (a - b)).collect()
    }

    /// Smallest time coordinate on a row.
    pub fn row_min_time(&self, k: usize) -> f64 {
        (0..self.n_nodes).map(|j| self.y(k, j)[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn row_max_time(&self, k: usize) -> f64 {
        (0..self.n_nodes)
            .map(|j| self.y(k, j)[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Column index wrapped (periodic) or `None` past the ends.
    pub fn neighbor(&self, j: usize, offset: isize) -> Option<usize> {
        let n = self.n_nodes as isize;
        let jj = j as isize + offset;
        if self.periodic {
            Some(jj.rem_euclid(n) as usize)
        } else if (0..n).contains(&jj) {
            Some(jj as usize)
        } else {
            None
        }
    }

    /// Largest flip norm of the node-wise difference of `y` over rows both
    /// surfaces share.
    pub fn max_difference(&self, other: &SolutionSurface, m: &dyn TargetMetric) -> Result<f64, MetricError> {
        let rows = self.n_rows().min(other.n_rows());
        let mut worst: f64 = 0.0;
        for k in 0..rows {
            for j in 0..self.n_nodes.min(other.n_nodes) {
                let a = self.y(k, j);
                let b = other.y(k, j);
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                worst = worst.max(metric_eval(m, a)?.flip_norm(&d));
            }
        }
        Ok(worst)
    }
}
