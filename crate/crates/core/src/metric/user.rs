use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Christoffel, TargetMetric, DEFAULT_FD_STEP};

type SpatialFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type ChristoffelFn = Arc<dyn Fn(&[f64]) -> Christoffel + Send + Sync>;

/// A product metric given by a closure for the spatial block.
///
/// Christoffel symbols come from central differences unless an analytic
/// closure is attached.
#[derive(Clone)]
pub struct UserMetric {
    name: String,
    n: usize,
    spatial: SpatialFn,
    christoffel: Option<ChristoffelFn>,
    injectivity_radius: f64,
    fd_step: f64,
}

impl UserMetric {
    pub fn new<F>(name: &str, n: usize, spatial: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        assert!(n >= 2, "spacetime dimension must be at least 2");
        Self {
            name: name.to_string(),
            n,
            spatial: Arc::new(spatial),
            christoffel: None,
            injectivity_radius: f64::INFINITY,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_christoffel<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> Christoffel + Send + Sync + 'static,
    {
        self.christoffel = Some(Arc::new(f));
        self
    }

    pub fn with_injectivity_radius(mut self, r: f64) -> Self {
        assert!(r > 0.0, "injectivity radius must be positive");
        self.injectivity_radius = r;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        assert!(step > 0.0);
        self.fd_step = step;
        self
    }
}

impl fmt::Debug for UserMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserMetric")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("analytic", &self.christoffel.is_some())
            .field("injectivity_radius", &self.injectivity_radius)
            .finish()
    }
}

impl TargetMetric for UserMetric {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.n
    }

    fn spatial(&self, p: &[f64]) -> DMatrix<f64> {
        (self.spatial)(p)
    }

    fn analytic_christoffel(&self, p: &[f64]) -> Option<Christoffel> {
        self.christoffel.as_ref().map(|f| f(p))
    }

    fn injectivity_radius(&self) -> f64 {
        self.injectivity_radius
    }

    fn fd_step(&self) -> f64 {
        self.fd_step
    }
}
