use nalgebra::DMatrix;

use super::{Christoffel, TargetMetric};

/// Flat `ℝ^{1,n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Minkowski {
    n: usize,
}

impl Minkowski {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "spacetime dimension must be at least 2");
        Self { n }
    }
}

impl TargetMetric for Minkowski {
    fn name(&self) -> &str {
        "minkowski"
    }

    fn dimension(&self) -> usize {
        self.n
    }

    fn spatial(&self, _p: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(self.n - 1, self.n - 1)
    }

    fn analytic_christoffel(&self, _p: &[f64]) -> Option<Christoffel> {
        Some(Christoffel::zeros(self.n))
    }
}
