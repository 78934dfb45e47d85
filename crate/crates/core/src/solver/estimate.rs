use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::metric::{metric_eval, sample_bounds_with_factor, MetricError, Region, TargetMetric};

/// How the neighbourhood radius δ used for the Christoffel bound is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeltaPolicy {
    /// A fixed δ.
    Fixed { delta: f64 },
    /// `δ = 5√2·rows·h·(u̲+v̲)`, so the δ term alone admits `rows` rows.
    Rows { rows: usize },
    /// `δ = factor·h·(u̲+v̲)`.
    StepMultiple { factor: f64 },
}

impl Default for DeltaPolicy {
    fn default() -> Self {
        DeltaPolicy::Rows { rows: 8 }
    }
}

impl DeltaPolicy {
    pub fn delta(&self, h: f64, uv: f64) -> f64 {
        match *self {
            DeltaPolicy::Fixed { delta } => delta,
            DeltaPolicy::Rows { rows } => 5.0 * SQRT_2 * rows as f64 * h * uv,
            DeltaPolicy::StepMultiple { factor } => factor * h * uv,
        }
    }
}

/// Size constants of one strip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    /// Injectivity radius `R_k` (`None` encodes `+∞`).
    pub injectivity_radius: Option<f64>,
    pub delta: f64,
    pub g: f64,
    pub u_bar: f64,
    pub v_bar: f64,
    pub l_k: f64,
    pub l: f64,
    pub k: f64,
    pub k_prime: f64,
    pub n_rows: usize,
    /// `l/√2 < h`: the strip formula admits less than one row.
    pub starved: bool,
}

impl StepEstimate {
    /// `L_k = min{R/5, 1/(11G), δ/5}`, `l = L_k/(u̲+v̲)`, `K′ = 4(u̲+v̲)`,
    /// `K = 3(u̲+v̲)/l` and `n_rows = max(1, ⌊l/(√2 h)⌋)`.
    pub fn from_constants(
        injectivity_radius: f64,
        g: f64,
        delta: f64,
        u_bar: f64,
        v_bar: f64,
        h: f64,
    ) -> Result<Self, SolverError> {
        let uv = u_bar + v_bar;
        if !(uv > 0.0) {
            return Err(SolverError::DegenerateStrip(0));
        }
        if !(delta > 0.0) {
            return Err(SolverError::PreconditionViolated(format!("δ = {delta} must be positive")));
        }
        let g_term = if g == 0.0 { f64::INFINITY } else { 1.0 / (11.0 * g) };
        let l_k = (injectivity_radius / 5.0).min(g_term).min(delta / 5.0);
        let l = l_k / uv;
        let rows = l / (SQRT_2 * h);
        // absorb roundoff so exact multiples are not floored one short
        let n_rows = ((rows * (1.0 + 1e-12)).floor() as usize).max(1);
        Ok(Self {
            injectivity_radius: injectivity_radius.is_finite().then_some(injectivity_radius),
            delta,
            g,
            u_bar,
            v_bar,
            l_k,
            l,
            k: 3.0 * uv / l,
            k_prime: 4.0 * uv,
            n_rows,
            starved: l / SQRT_2 < h,
        })
    }
}

/// C¹ flip-norm bounds `(u̲, v̲)` of a row: the largest flip norm of the node
/// values and of their centred x-differences.
pub fn c1_bounds(
    m: &dyn TargetMetric,
    y: &[f64],
    u: &[f64],
    v: &[f64],
    n: usize,
    h: f64,
) -> Result<(f64, f64), MetricError> {
    let nodes = y.len() / n;
    let at = |f: &'_ [f64], j: isize| -> Vec<f64> {
        let j = j.rem_euclid(nodes as isize) as usize;
        f[j * n..(j + 1) * n].to_vec()
    };
    let mut ub: f64 = 0.0;
    let mut vb: f64 = 0.0;
    for j in 0..nodes as isize {
        let g = metric_eval(m, &at(y, j))?;
        let dx = |f: &[f64]| -> Vec<f64> {
            at(f, j + 1).iter().zip(at(f, j - 1)).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        };
        ub = ub.max(g.flip_norm(&at(u, j))).max(g.flip_norm(&dx(u)));
        vb = vb.max(g.flip_norm(&at(v, j))).max(g.flip_norm(&dx(v)));
    }
    Ok((ub, vb))
}

/// Strip constants for the row `(y, u, v)`.
///
/// `G` is sampled over the coordinate box containing the flip-metric
/// δ-neighbourhood of the row image.
#[allow(clippy::too_many_arguments)]
pub fn strip_estimate(
    m: &dyn TargetMetric,
    y: &[f64],
    u: &[f64],
    v: &[f64],
    h: f64,
    policy: &DeltaPolicy,
    samples: usize,
    safety_factor: f64,
) -> Result<StepEstimate, SolverError> {
    let n = m.dimension();
    let (ub, vb) = c1_bounds(m, y, u, v, n, h)?;
    if !(ub + vb > 0.0) {
        return Err(SolverError::DegenerateStrip(0));
    }
    let delta = policy.delta(h, ub + vb);
    // smallest flip-metric eigenvalue over the row converts δ to a coordinate margin
    let mut lam_min = f64::INFINITY;
    for p in y.chunks(n) {
        let hm = metric_eval(m, p)?.flip_matrix();
        lam_min = lam_min.min(hm.symmetric_eigenvalues().min());
    }
    let margin = delta / lam_min.sqrt();
    let region = Region::bounding(y.chunks(n), margin)?;
    let bounds = sample_bounds_with_factor(m, &region, samples, safety_factor)?;
    StepEstimate::from_constants(bounds.injectivity_radius, bounds.christoffel_bound, delta, ub, vb, h)
}
