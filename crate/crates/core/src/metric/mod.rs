//! Globally hyperbolic product spacetimes `-dt² + g_ij(t,x) dx^i dx^j`.
//!
//! Every target metric lives in a single global product chart whose
//! coordinate 0 is the time function. Besides the Lorentzian metric itself
//! the module provides the Riemannian flip metric `+dt² + g_ij dx^i dx^j`
//! used for all norms and bounds, Levi-Civita Christoffel symbols (analytic
//! where the metric supplies them, central differences otherwise), the
//! operator norm of the Christoffel bilinear map, and sampled chart bounds.

mod catalog;
mod christoffel;
mod flrw;
mod minkowski;
mod reversed;
mod user;

pub use catalog::{metric_registry, scale_factor_registry, MetricSelection};
pub use christoffel::{christoffel, christoffel_fd, christoffel_operator_norm, Christoffel};
pub use flrw::{ConstantScale, ExponentialScale, Flrw, PolynomialScale, ScaleFactor};
pub use minkowski::Minkowski;
pub use reversed::TimeReversed;
pub use user::UserMetric;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Central-difference step (chart units) used for numeric metric derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Safety factor applied on top of the sampled Christoffel norm maximum.
pub const DEFAULT_SAFETY_FACTOR: f64 = 1.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("non-finite metric entries at point {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("spatial metric not positive definite at point {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("point has non-finite coordinates: {point:?}")]
    NonFinitePoint { point: Vec<f64> },
    #[error("degenerate sampling region: {0}")]
    DegenerateRegion(String),
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(String),
}

/// A point of `M = ℝ × N` in the global product chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    coords: Vec<f64>,
}

impl SpacetimePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, MetricError> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(MetricError::NonFinitePoint { point: coords });
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn time(&self) -> f64 {
        self.coords[0]
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }
}

/// A tangent vector together with the point it is attached to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    base: SpacetimePoint,
    components: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: SpacetimePoint, components: Vec<f64>) -> Result<Self, MetricError> {
        if components.len() != base.dimension() {
            return Err(MetricError::DimensionMismatch {
                expected: base.dimension(),
                got: components.len(),
            });
        }
        Ok(Self { base, components })
    }

    pub fn base(&self) -> &SpacetimePoint {
        &self.base
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }
}

/// A Lorentzian product metric on `ℝ × N`.
///
/// Implementors only supply the spatial block; the time block is always
/// `-1` and the cross terms vanish.
pub trait TargetMetric: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Spacetime dimension `n` (time plus `n - 1` spatial coordinates).
    fn dimension(&self) -> usize;

    /// Spatial block `g_ij(p)`, an `(n-1) × (n-1)` matrix.
    fn spatial(&self, p: &[f64]) -> DMatrix<f64>;

    /// Closed-form Christoffel symbols, when the metric knows them.
    fn analytic_christoffel(&self, _p: &[f64]) -> Option<Christoffel> {
        None
    }

    /// Injectivity radius estimate of the flip metric; `+∞` for global charts.
    fn injectivity_radius(&self) -> f64 {
        f64::INFINITY
    }

    fn fd_step(&self) -> f64 {
        DEFAULT_FD_STEP
    }
}

/// The metric evaluated (and checked) at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricAt {
    g: DMatrix<f64>,
}

impl MetricAt {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dimension(&self) -> usize {
        self.g.nrows()
    }

    /// `g(a, b)`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dimension();
        let mut acc = -a[0] * b[0];
        for i in 1..n {
            for j in 1..n {
                acc += self.g[(i, j)] * a[i] * b[j];
            }
        }
        acc
    }

    /// `h(a, a) = g(a, a) + 2 (a⁰)²`.
    pub fn flip_sq(&self, a: &[f64]) -> f64 {
        self.inner(a, a) + 2.0 * a[0] * a[0]
    }

    pub fn flip_norm(&self, a: &[f64]) -> f64 {
        self.flip_sq(a).max(0.0).sqrt()
    }

    /// The flip metric `diag(1, g_ij)` as a matrix.
    pub fn flip_matrix(&self) -> DMatrix<f64> {
        let mut h = self.g.clone();
        h[(0, 0)] = 1.0;
        h
    }
}

/// Evaluates `g_{αβ}(p)`, checking finiteness and positive definiteness of
/// the spatial block.
pub fn metric_eval(m: &dyn TargetMetric, p: &[f64]) -> Result<MetricAt, MetricError> {
    let n = m.dimension();
    if p.len() != n {
        return Err(MetricError::DimensionMismatch {
            expected: n,
            got: p.len(),
        });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(MetricError::NonFinitePoint { point: p.to_vec() });
    }
    let spatial = m.spatial(p);
    if spatial.iter().any(|x| !x.is_finite()) {
        return Err(MetricError::NonFinite { point: p.to_vec() });
    }
    let sym = (&spatial + spatial.transpose()) * 0.5;
    if sym.clone().cholesky().is_none() {
        return Err(MetricError::NotPositiveDefinite { point: p.to_vec() });
    }
    let mut g = DMatrix::zeros(n, n);
    g[(0, 0)] = -1.0;
    g.view_mut((1, 1), (n - 1, n - 1)).copy_from(&sym);
    Ok(MetricAt { g })
}

/// `g(v, w)` for two vectors attached to the same point.
pub fn lorentz_inner(
    m: &dyn TargetMetric,
    v: &TangentVector,
    w: &TangentVector,
) -> Result<f64, MetricError> {
    if v.base != w.base {
        return Err(MetricError::BaseMismatch);
    }
    let g = metric_eval(m, v.base.coords())?;
    Ok(g.inner(&v.components, &w.components))
}

/// Squared flip-metric norm `h(v, v)`; never negative.
pub fn flip_norm_sq(m: &dyn TargetMetric, v: &TangentVector) -> Result<f64, MetricError> {
    let g = metric_eval(m, v.base.coords())?;
    Ok(g.flip_sq(&v.components))
}

/// An axis-aligned box in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, MetricError> {
        if lower.len() != upper.len() {
            return Err(MetricError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !a.is_finite() || !b.is_finite() || b < a)
        {
            return Err(MetricError::DegenerateRegion(format!(
                "lower {lower:?} upper {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Smallest box containing all points, grown by `margin` on every side.
    pub fn bounding<'a>(
        points: impl IntoIterator<Item = &'a [f64]>,
        margin: f64,
    ) -> Result<Self, MetricError> {
        let mut lower: Vec<f64> = Vec::new();
        let mut upper: Vec<f64> = Vec::new();
        for p in points {
            if lower.is_empty() {
                lower = p.to_vec();
                upper = p.to_vec();
            } else {
                for (i, &c) in p.iter().enumerate() {
                    lower[i] = lower[i].min(c);
                    upper[i] = upper[i].max(c);
                }
            }
        }
        if lower.is_empty() {
            return Err(MetricError::DegenerateRegion("no points".into()));
        }
        lower.iter_mut().for_each(|c| *c -= margin);
        upper.iter_mut().for_each(|c| *c += margin);
        Self::new(lower, upper)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(c, (lo, hi))| *c >= *lo && *c <= *hi)
    }
}

/// Bounds governing how far one strip may reach into the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBounds {
    /// Injectivity radius estimate `R` (may be `+∞`).
    pub injectivity_radius: f64,
    /// Upper bound `G` for the flip operator norm of `Γ` on the region.
    pub christoffel_bound: f64,
    pub samples: usize,
}

/// Radical inverse of `index` in the given prime base.
fn radical_inverse(mut index: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    inv = acc;
    inv
}

const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Halton point number `index` (starting at 1) in the unit cube of dimension `dim`.
pub(crate) fn halton(index: usize, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|d| radical_inverse(index, PRIMES[d % PRIMES.len()]))
        .collect()
}

/// Samples the Christoffel operator norm over `region` and returns the
/// chart bounds: `G` is the sampled maximum times the safety factor and `R`
/// is whatever the metric reports.
///
/// The sample set is the box corners followed by the first `n_samples`
/// Halton points, so a larger `n_samples` always contains a smaller one.
pub fn sample_bounds(
    m: &dyn TargetMetric,
    region: &Region,
    n_samples: usize,
) -> Result<ChartBounds, MetricError> {
    sample_bounds_with_factor(m, region, n_samples, DEFAULT_SAFETY_FACTOR)
}

pub fn sample_bounds_with_factor(
    m: &dyn TargetMetric,
    region: &Region,
    n_samples: usize,
    safety_factor: f64,
) -> Result<ChartBounds, MetricError> {
    let n = m.dimension();
    if region.dimension() != n {
        return Err(MetricError::DimensionMismatch {
            expected: n,
            got: region.dimension(),
        });
    }
    if n_samples == 0 {
        return Err(MetricError::DegenerateRegion("n_samples must be ≥ 1".into()));
    }
    let mut best: f64 = 0.0;
    let mut count = 0;
    let span: Vec<f64> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(a, b)| b - a)
        .collect();
    // corners
    for mask in 0..(1usize << n) {
        let p: Vec<f64> = (0..n)
            .map(|d| {
                if mask & (1 << d) != 0 {
                    region.upper[d]
                } else {
                    region.lower[d]
                }
            })
            .collect();
        best = best.max(christoffel_operator_norm(m, &p)?);
        count += 1;
    }
    for i in 1..=n_samples {
        let unit = halton(i, n);
        let p: Vec<f64> = (0..n).map(|d| region.lower[d] + span[d] * unit[d]).collect();
        best = best.max(christoffel_operator_norm(m, &p)?);
        count += 1;
    }
    Ok(ChartBounds {
        injectivity_radius: m.injectivity_radius(),
        christoffel_bound: safety_factor * best,
        samples: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn tv(base: &[f64], c: &[f64]) -> TangentVector {
        TangentVector::new(SpacetimePoint::new(base.to_vec()).unwrap(), c.to_vec()).unwrap()
    }

    #[test]
    fn minkowski_metric_is_diagonal() {
        let m = Minkowski::new(4);
        let g = metric_eval(&m, &[0.3, 1.0, -2.0, 5.0]).unwrap();
        let expect = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 1.0, 1.0]));
        assert_eq!(g.matrix(), &expect);
    }

    #[test]
    fn flrw_metric_at_ln2() {
        let m = Flrw::new(3, Box::new(ExponentialScale::new(1.0)));
        let g0 = metric_eval(&m, &[0.0, 0.4, 0.1]).unwrap();
        assert_relative_eq!(g0.matrix()[(1, 1)], 1.0);
        let g = metric_eval(&m, &[2f64.ln(), 0.4, 0.1]).unwrap();
        assert_relative_eq!(g.matrix()[(0, 0)], -1.0);
        assert_relative_eq!(g.matrix()[(1, 1)], 4.0, epsilon = 1e-12);
        assert_relative_eq!(g.matrix()[(2, 2)], 4.0, epsilon = 1e-12);
        assert_eq!(g.matrix()[(1, 2)], 0.0);
    }

    #[test]
    fn inner_products_in_minkowski() {
        let m = Minkowski::new(3);
        let p = [0.0, 0.0, 0.0];
        let e0 = tv(&p, &[1.0, 0.0, 0.0]);
        let e1 = tv(&p, &[0.0, 1.0, 0.0]);
        let null = tv(&p, &[1.0, 1.0, 0.0]);
        assert_eq!(lorentz_inner(&m, &e0, &e0).unwrap(), -1.0);
        assert_eq!(lorentz_inner(&m, &e0, &e1).unwrap(), 0.0);
        assert_eq!(lorentz_inner(&m, &null, &null).unwrap(), 0.0);
        assert_eq!(flip_norm_sq(&m, &e0).unwrap(), 1.0);
        assert_eq!(flip_norm_sq(&m, &null).unwrap(), 2.0);
    }

    #[test]
    fn flip_norm_of_spatial_vector_in_flrw() {
        let m = Flrw::new(3, Box::new(ExponentialScale::new(1.0)));
        let v = tv(&[2f64.ln(), 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert_relative_eq!(flip_norm_sq(&m, &v).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let m = Minkowski::new(2);
        let a = tv(&[0.0, 0.0], &[1.0, 0.0]);
        let b = tv(&[0.0, 1.0], &[1.0, 0.0]);
        assert_eq!(lorentz_inner(&m, &a, &b), Err(MetricError::BaseMismatch));
    }

    #[test]
    fn non_positive_spatial_metric_aborts_with_point() {
        let m = UserMetric::new("bad", 2, |p: &[f64]| {
            DMatrix::from_element(1, 1, 1.0 - p[0])
        });
        assert!(metric_eval(&m, &[0.5, 0.0]).is_ok());
        let err = metric_eval(&m, &[2.0, 0.0]).unwrap_err();
        assert_eq!(
            err,
            MetricError::NotPositiveDefinite {
                point: vec![2.0, 0.0]
            }
        );
        let nan = UserMetric::new("nan", 2, |_p: &[f64]| DMatrix::from_element(1, 1, f64::NAN));
        assert!(matches!(
            metric_eval(&nan, &[0.0, 0.0]),
            Err(MetricError::NonFinite { .. })
        ));
    }

    #[test]
    fn minkowski_bounds() {
        let m = Minkowski::new(3);
        let r = Region::new(vec![-1.0, -1.0, -1.0], vec![1.0, 1.0, 1.0]).unwrap();
        let b = sample_bounds(&m, &r, 16).unwrap();
        assert_eq!(b.christoffel_bound, 0.0);
        assert!(b.injectivity_radius.is_infinite());
    }

    #[test]
    fn flrw_bounds_dominate_endpoints_and_grow_with_samples() {
        let m = Flrw::new(2, Box::new(PolynomialScale::new(0.7)));
        let r = Region::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let at0 = christoffel_operator_norm(&m, &[0.0, 0.0]).unwrap();
        let at1 = christoffel_operator_norm(&m, &[1.0, 0.0]).unwrap();
        let mut prev = 0.0;
        for k in 0..6 {
            let b = sample_bounds(&m, &r, 1 << k).unwrap();
            assert!(b.christoffel_bound >= at0 && b.christoffel_bound >= at1);
            assert!(b.christoffel_bound >= prev);
            prev = b.christoffel_bound;
        }
    }

    #[test]
    fn degenerate_regions_and_zero_samples_fail() {
        assert!(Region::new(vec![1.0], vec![0.0]).is_err());
        let m = Minkowski::new(2);
        let r = Region::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(sample_bounds(&m, &r, 0).is_err());
    }

    #[test]
    fn halton_is_in_unit_cube() {
        for i in 1..100 {
            let p = halton(i, 4);
            assert!(p.iter().all(|c| (0.0..1.0).contains(c)));
        }
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
    }
}
