//! Post-hoc checks on a computed surface: null drift, causality,
//! conformality, area and energy, time slices, stability, and closed-form
//! oracles to compare against.

mod causal;
mod conformal;
mod functionals;
mod null;
mod oracle;
mod slice;
mod stability;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use causal::{
    causal_check, degeneracy_profile, is_degenerate, locate_minimum, CausalKind, CausalReport, CausalViolation,
    DEFAULT_TOL_CAUSAL, DEGENERACY_RATIO,
};
pub use conformal::{conformal_factor, ConformalReport};
pub use functionals::{area_functional, energy_functional, FunctionalValue};
pub use null::{null_drift, NullDrift};
pub use oracle::{
    oracle_registry, sample_oracle, AnalyticSolution, CollapsingCircle, FlatSheet, OracleGrid, TravellingWave,
};
pub use slice::{time_slice_preimage, SliceGraph};
pub use stability::{energy_stability, StabilityReport};

use crate::metric::{MetricError, TargetMetric};
use crate::solver::{wave_map_residual, SolutionSurface};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("surface has too few rows")]
    EmptySurface,
    #[error("column {column} does not cross y0 = {level} (reaches {reached})")]
    SliceMiss { column: usize, level: f64, reached: f64 },
    #[error("grids differ: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Scalar digest of the checks on one surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSummary {
    pub rows: usize,
    pub final_time: f64,
    pub max_null_drift: f64,
    pub causal_violations: usize,
    pub degenerate_nodes: usize,
    pub min_time_component: f64,
    pub min_lambda: f64,
    pub max_offdiagonal: f64,
    pub max_trace_defect: f64,
    pub area: f64,
    pub energy: f64,
    pub riemannian_nodes: usize,
    pub max_residual: f64,
}

pub fn summarize(m: &dyn TargetMetric, s: &SolutionSurface, tol_causal: f64) -> Result<DiagnosticsSummary, MetricError> {
    let null = null_drift(m, s)?;
    let causal = causal_check(m, s, tol_causal)?;
    let conf = conformal_factor(m, s)?;
    let area = area_functional(m, s)?;
    let energy = energy_functional(m, s)?;
    let residual = wave_map_residual(m, s)?;
    Ok(DiagnosticsSummary {
        rows: s.n_rows(),
        final_time: s.rows.last().map_or(0.0, |r| r.t),
        max_null_drift: null.max(),
        causal_violations: causal.violations.len(),
        degenerate_nodes: causal.degenerate.len(),
        min_time_component: causal.min_time_component,
        min_lambda: conf.min_lambda,
        max_offdiagonal: conf.max_offdiagonal,
        max_trace_defect: conf.max_trace_defect,
        area: area.value,
        energy: energy.value,
        riemannian_nodes: area.riemannian_nodes.len(),
        max_residual: residual.max,
    })
}
