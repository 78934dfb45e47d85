//! Closed initial curves `k = (k₀, k₁)`: validation against the
//! admissibility hypotheses, conformal reparametrization and the null
//! decomposition `u = k₀′ + k₁`, `v = −k₀′ + k₁`.

mod catalog;
mod conformal;
mod derivative;
pub mod fourier;

pub use catalog::{curve_registry, parse_node_file, CurveFamily};
pub use conformal::{conformalize, conformalize_with, ConformalOptions};
pub use derivative::{derivative_registry, Central4, DerivativeScheme, Spectral};

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{metric_eval, MetricError, SpacetimePoint, TangentVector, TargetMetric};

/// Relative tolerance used by [`InitialCurve::validate`] for the equality
/// hypotheses (orthogonality and the norm condition).
pub const DEFAULT_VALIDATE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("node count {0} is not a power of two ≥ 4")]
    NodeCount(usize),
    #[error("malformed curve: {0}")]
    Shape(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("curve is not admissible: {}", summarize(.0))]
    Inadmissible(Vec<Violation>),
    #[error("resampled curve aliases ({fraction:.2e} of spectral energy in the top band at N = {n}); use a larger N")]
    Aliasing { fraction: f64, n: usize },
    #[error("reparametrization is not monotone near parameter {0}")]
    NonMonotone(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| x.message.as_str()).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Raw,
    Conformalized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    TangentNotSpacelike,
    VelocityNotTimelike,
    Degenerate,
    NotOrthogonal,
    NormCondition,
    PastDirected,
}

/// One failed hypothesis, reported at its worst node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: usize,
    pub magnitude: f64,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (magnitude {:.3e})", self.message, self.magnitude)
    }
}

/// Periodic samples of `k₀` and `k₁` at `x_j = jP/N`.
#[derive(Clone)]
pub struct InitialCurve {
    period: f64,
    k0: Vec<Vec<f64>>,
    k1: Vec<Vec<f64>>,
    provenance: Provenance,
    scheme: Arc<dyn DerivativeScheme>,
}

impl fmt::Debug for InitialCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialCurve")
            .field("period", &self.period)
            .field("n_nodes", &self.k0.len())
            .field("provenance", &self.provenance)
            .field("scheme", &self.scheme.name())
            .finish()
    }
}

impl InitialCurve {
    pub fn new(period: f64, k0: Vec<Vec<f64>>, k1: Vec<Vec<f64>>) -> Result<Self, CurveError> {
        let n = k0.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(CurveError::NodeCount(n));
        }
        if k1.len() != n {
            return Err(CurveError::Shape(format!("{} k0 nodes but {} k1 nodes", n, k1.len())));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(CurveError::Shape(format!("period {period} must be positive")));
        }
        let dim = k0[0].len();
        if dim < 2 {
            return Err(CurveError::Shape("dimension must be at least 2".into()));
        }
        for (j, (a, b)) in k0.iter().zip(&k1).enumerate() {
            if a.len() != dim || b.len() != dim {
                return Err(CurveError::Shape(format!("node {j} has the wrong dimension")));
            }
            if a.iter().chain(b).any(|x| !x.is_finite()) {
                return Err(CurveError::Shape(format!("node {j} is not finite")));
            }
        }
        Ok(Self {
            period,
            k0,
            k1,
            provenance: Provenance::Raw,
            scheme: Arc::new(Spectral),
        })
    }

    pub fn with_scheme(mut self, scheme: Arc<dyn DerivativeScheme>) -> Self {
        self.scheme = scheme;
        self
    }

    pub(crate) fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_nodes(&self) -> usize {
        self.k0.len()
    }

    pub fn dimension(&self) -> usize {
        self.k0[0].len()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n_nodes() as f64
    }

    pub fn k0(&self) -> &[Vec<f64>] {
        &self.k0
    }

    pub fn k1(&self) -> &[Vec<f64>] {
        &self.k1
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn scheme(&self) -> &Arc<dyn DerivativeScheme> {
        &self.scheme
    }

    pub fn point(&self, j: usize) -> SpacetimePoint {
        SpacetimePoint::new(self.k0[j].clone()).expect("checked finite")
    }

    pub fn velocity(&self, j: usize) -> TangentVector {
        TangentVector::new(self.point(j), self.k1[j].clone()).expect("checked shape")
    }

    /// Derivative of node-indexed vectors along the curve parameter.
    pub fn differentiate(&self, field: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = field.len();
        let dim = field[0].len();
        let mut out = vec![vec![0.0; dim]; n];
        for c in 0..dim {
            let comp: Vec<f64> = field.iter().map(|v| v[c]).collect();
            let d = self.scheme.derivative(&comp, self.period);
            for (o, dv) in out.iter_mut().zip(d) {
                o[c] = dv;
            }
        }
        out
    }

    /// `k₀′` at every node.
    pub fn tangent(&self) -> Vec<Vec<f64>> {
        self.differentiate(&self.k0)
    }

    /// Every violated admissibility hypothesis, each at its worst node.
    ///
    /// Sign conditions are strict. Orthogonality and the norm condition
    /// `⟨k₀′,k₀′⟩ = −⟨k₁,k₁⟩` are checked relative to the flip norms with
    /// tolerance `tol`.
    pub fn validate(&self, m: &dyn TargetMetric, tol: f64) -> Result<Vec<Violation>, CurveError> {
        self.check_dimension(m)?;
        let tangent = self.tangent();
        let n = self.n_nodes();
        let mut spacelike = Vec::with_capacity(n);
        let mut timelike = Vec::with_capacity(n);
        let mut degenerate = Vec::with_capacity(n);
        let mut orth = Vec::with_capacity(n);
        let mut norm = Vec::with_capacity(n);
        let mut past = Vec::with_capacity(n);
        for j in 0..n {
            let g = metric_eval(m, &self.k0[j])?;
            let t = &tangent[j];
            let k = &self.k1[j];
            let tt = g.inner(t, t);
            let kk = g.inner(k, k);
            let scale = g.flip_sq(t) + g.flip_sq(k);
            spacelike.push(-tt);
            timelike.push(kk);
            let plus: Vec<f64> = t.iter().zip(k).map(|(a, b)| b + a).collect();
            let minus: Vec<f64> = t.iter().zip(k).map(|(a, b)| b - a).collect();
            degenerate.push(-g.flip_sq(&plus).min(g.flip_sq(&minus)));
            let rel = if scale > 0.0 { scale } else { 1.0 };
            orth.push(g.inner(t, k).abs() / rel - tol);
            norm.push((tt + kk).abs() / rel - tol);
            past.push(-k[0]);
        }
        let mut out = Vec::new();
        let mut check = |values: &[f64], kind, what: &str, strict_zero: bool| {
            let (node, worst) = worst_node(values);
            let violated = if strict_zero { worst >= 0.0 } else { worst > 0.0 };
            if violated {
                out.push(Violation {
                    kind,
                    node,
                    magnitude: match kind {
                        ViolationKind::NotOrthogonal | ViolationKind::NormCondition => worst + tol,
                        _ => worst.abs(),
                    },
                    message: format!("{what} at node {node}"),
                });
            }
        };
        check(&spacelike, ViolationKind::TangentNotSpacelike, "k0' not spacelike", true);
        check(&timelike, ViolationKind::VelocityNotTimelike, "k1 not timelike", true);
        check(&degenerate, ViolationKind::Degenerate, "k1 ± k0' vanishes", true);
        check(&orth, ViolationKind::NotOrthogonal, "k0' not orthogonal to k1", false);
        check(
            &norm,
            ViolationKind::NormCondition,
            "norm condition <k0',k0'> != -<k1,k1>",
            false,
        );
        check(&past, ViolationKind::PastDirected, "k1 not future-directed", true);
        Ok(out)
    }

    fn check_dimension(&self, m: &dyn TargetMetric) -> Result<(), CurveError> {
        if m.dimension() != self.dimension() {
            return Err(MetricError::DimensionMismatch {
                expected: m.dimension(),
                got: self.dimension(),
            }
            .into());
        }
        Ok(())
    }

    /// Gram–Schmidt step removing the `k₀′` component of `k₁`.
    pub fn orthogonalize_velocity(&self, m: &dyn TargetMetric) -> Result<Self, CurveError> {
        self.check_dimension(m)?;
        let tangent = self.tangent();
        let mut k1 = self.k1.clone();
        for (j, k) in k1.iter_mut().enumerate() {
            let g = metric_eval(m, &self.k0[j])?;
            let t = &tangent[j];
            let tt = g.inner(t, t);
            if tt <= 0.0 {
                return Err(CurveError::Shape(format!(
                    "cannot project at node {j}: tangent not spacelike"
                )));
            }
            let c = g.inner(t, k) / tt;
            for (kc, tc) in k.iter_mut().zip(t) {
                *kc -= c * tc;
            }
        }
        let mut out = Self::new(self.period, self.k0.clone(), k1)?.with_scheme(self.scheme.clone());
        out.provenance = Provenance::Raw;
        Ok(out)
    }

    /// Linear rescale of the worldsheet to period `2π`.
    ///
    /// Returns the rescaled curve and the factor `σ = P/2π` by which worldsheet
    /// coordinates were divided; `k₁` is multiplied by `σ`.
    pub fn normalized(&self) -> (Self, f64) {
        let sigma = self.period / TAU;
        let mut out = self.clone();
        out.period = TAU;
        if sigma != 1.0 {
            for k in &mut out.k1 {
                k.iter_mut().for_each(|c| *c *= sigma);
            }
        }
        (out, sigma)
    }

    /// The data for solving backward in time as a forward problem in the
    /// time-reversed metric: `k₀ ↦ R k₀`, `k₁ ↦ R(−k₁)` with `R` the time flip.
    pub fn time_reflected(&self) -> Self {
        let mut out = self.clone();
        for p in &mut out.k0 {
            p[0] = -p[0];
        }
        for k in &mut out.k1 {
            for c in k.iter_mut().skip(1) {
                *c = -*c;
            }
        }
        out
    }

    /// Null characteristic data on the base circle.
    pub fn null_decompose(&self, m: &dyn TargetMetric) -> Result<NullData, CurveError> {
        self.check_dimension(m)?;
        let tangent = self.tangent();
        let u: Vec<Vec<f64>> = tangent
            .iter()
            .zip(&self.k1)
            .map(|(t, k)| t.iter().zip(k).map(|(a, b)| a + b).collect())
            .collect();
        let v: Vec<Vec<f64>> = tangent
            .iter()
            .zip(&self.k1)
            .map(|(t, k)| t.iter().zip(k).map(|(a, b)| b - a).collect())
            .collect();
        let ux = self.differentiate(&u);
        let vx = self.differentiate(&v);
        let mut u_bar: f64 = 0.0;
        let mut v_bar: f64 = 0.0;
        for j in 0..self.n_nodes() {
            let g = metric_eval(m, &self.k0[j])?;
            u_bar = u_bar.max(g.flip_norm(&u[j])).max(g.flip_norm(&ux[j]));
            v_bar = v_bar.max(g.flip_norm(&v[j])).max(g.flip_norm(&vx[j]));
        }
        Ok(NullData {
            base: self.k0.clone(),
            u,
            v,
            u_bar,
            v_bar,
        })
    }
}

/// Index of the largest value; near-ties go to the lowest index.
fn worst_node(values: &[f64]) -> (usize, f64) {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-12 * max.abs().max(1.0);
    let j = values
        .iter()
        .position(|&x| x >= max - slack)
        .unwrap_or(0);
    (j, max)
}

/// Characteristic derivatives of the initial data at the base nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullData {
    pub base: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// `max(sup‖u‖_h, sup‖∂ₓu‖_h)` over the nodes.
    pub u_bar: f64,
    pub v_bar: f64,
}

impl NullData {
    /// Largest `|⟨u,u⟩|` and `|⟨v,v⟩|` relative to `max ‖u‖²_h`.
    pub fn null_defect(&self, m: &dyn TargetMetric) -> Result<(f64, f64), MetricError> {
        let mut du: f64 = 0.0;
        let mut dv: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..self.u.len() {
            let g = metric_eval(m, &self.base[j])?;
            du = du.max(g.inner(&self.u[j], &self.u[j]).abs());
            dv = dv.max(g.inner(&self.v[j], &self.v[j]).abs());
            scale = scale.max(g.flip_sq(&self.u[j])).max(g.flip_sq(&self.v[j]));
        }
        let s = if scale > 0.0 { scale } else { 1.0 };
        Ok((du / s, dv / s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Minkowski;

    fn circle(n: usize, r: f64, k1: impl Fn(f64) -> Vec<f64>) -> InitialCurve {
        let xs: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        InitialCurve::new(
            TAU,
            xs.iter().map(|&x| vec![0.0, r * x.sin(), r * x.cos()]).collect(),
            xs.iter().map(|&x| k1(x)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn unit_circle_is_admissible() {
        let c = circle(32, 1.0, |_| vec![1.0, 0.0, 0.0]);
        assert!(c.validate(&Minkowski::new(3), 1e-8).unwrap().is_empty());
    }

    #[test]
    fn null_velocity_is_reported_at_node_zero() {
        let c = circle(32, 1.0, |x| vec![1.0, x.cos(), -x.sin()]);
        let v = c.validate(&Minkowski::new(3), 1e-8).unwrap();
        let timelike = v
            .iter()
            .find(|x| x.kind == ViolationKind::VelocityNotTimelike)
            .unwrap();
        assert_eq!(timelike.message, "k1 not timelike at node 0");
    }

    #[test]
    fn radius_two_violates_norm_condition() {
        let c = circle(32, 2.0, |_| vec![1.0, 0.0, 0.0]);
        let v = c.validate(&Minkowski::new(3), 1e-8).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NormCondition);
        assert!(v[0].message.starts_with("norm condition"));
    }

    #[test]
    fn null_decomposition_of_unit_circle() {
        let c = circle(32, 1.0, |_| vec![1.0, 0.0, 0.0]);
        let m = Minkowski::new(3);
        let nd = c.null_decompose(&m).unwrap();
        for (a, b) in nd.u[0].iter().zip([1.0, 1.0, 0.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in nd.v[0].iter().zip([1.0, -1.0, 0.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let (du, dv) = nd.null_defect(&m).unwrap();
        assert!(du < 1e-14 && dv < 1e-14);
        // |u| = √2 and |∂ₓu| = 1
        assert!((nd.u_bar - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_velocity_is_rejected_by_validate() {
        let c = circle(16, 1.0, |_| vec![0.0, 0.0, 0.0]);
        let v = c.validate(&Minkowski::new(3), 1e-8).unwrap();
        assert!(v.iter().any(|x| x.kind == ViolationKind::VelocityNotTimelike));
    }

    #[test]
    fn normalization_scales_velocity() {
        let c = InitialCurve::new(
            2.0 * TAU,
            (0..16).map(|j| vec![0.0, j as f64, 0.0]).collect(),
            vec![vec![1.0, 0.0, 0.0]; 16],
        )
        .unwrap();
        let (n, s) = c.normalized();
        assert_eq!(s, 2.0);
        assert_eq!(n.period(), TAU);
        assert_eq!(n.k1()[3], vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_node_counts() {
        let bad = InitialCurve::new(TAU, vec![vec![0.0, 0.0]; 12], vec![vec![1.0, 0.0]; 12]);
        assert_eq!(bad.unwrap_err(), CurveError::NodeCount(12));
    }
}
