use std::fmt;

use nalgebra::DMatrix;

use super::{Christoffel, TargetMetric};

/// A scale factor `a(t) > 0` with its derivative.
pub trait ScaleFactor: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
}

/// `a(t) = a₀`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantScale {
    pub a0: f64,
}

impl ConstantScale {
    pub fn new(a0: f64) -> Self {
        Self { a0 }
    }
}

impl ScaleFactor for ConstantScale {
    fn name(&self) -> &str {
        "constant"
    }
    fn value(&self, _t: f64) -> f64 {
        self.a0
    }
    fn derivative(&self, _t: f64) -> f64 {
        0.0
    }
}

/// `a(t) = e^{Ht}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentialScale {
    pub hubble: f64,
}

impl ExponentialScale {
    pub fn new(hubble: f64) -> Self {
        Self { hubble }
    }
}

impl ScaleFactor for ExponentialScale {
    fn name(&self) -> &str {
        "exponential"
    }
    fn value(&self, t: f64) -> f64 {
        (self.hubble * t).exp()
    }
    fn derivative(&self, t: f64) -> f64 {
        self.hubble * (self.hubble * t).exp()
    }
}

/// `a(t) = 1 + εt²`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialScale {
    pub epsilon: f64,
}

impl PolynomialScale {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }
}

impl ScaleFactor for PolynomialScale {
    fn name(&self) -> &str {
        "polynomial"
    }
    fn value(&self, t: f64) -> f64 {
        1.0 + self.epsilon * t * t
    }
    fn derivative(&self, t: f64) -> f64 {
        2.0 * self.epsilon * t
    }
}

/// Spatially flat FLRW: `-dt² + a(t)² δ_ij dx^i dx^j`.
#[derive(Debug)]
pub struct Flrw {
    n: usize,
    scale: Box<dyn ScaleFactor>,
    name: String,
}

impl Flrw {
    pub fn new(n: usize, scale: Box<dyn ScaleFactor>) -> Self {
        assert!(n >= 2, "spacetime dimension must be at least 2");
        let name = format!("flrw-{}", scale.name());
        Self { n, scale, name }
    }

    pub fn scale(&self) -> &dyn ScaleFactor {
        self.scale.as_ref()
    }
}

impl TargetMetric for Flrw {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.n
    }

    fn spatial(&self, p: &[f64]) -> DMatrix<f64> {
        let a = self.scale.value(p[0]);
        DMatrix::identity(self.n - 1, self.n - 1) * (a * a)
    }

    fn analytic_christoffel(&self, p: &[f64]) -> Option<Christoffel> {
        let a = self.scale.value(p[0]);
        let ad = self.scale.derivative(p[0]);
        let mut c = Christoffel::zeros(self.n);
        for i in 1..self.n {
            c.set(0, i, i, a * ad);
            c.set_sym(i, 0, i, ad / a);
        }
        Some(c)
    }
}
