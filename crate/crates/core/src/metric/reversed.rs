use nalgebra::DMatrix;

use super::{Christoffel, TargetMetric};

/// The pullback of a metric under `t ↦ −t`.
///
/// Solving forward in the reversed metric and relabelling time is the same
/// as solving backward in the original one.
#[derive(Debug)]
pub struct TimeReversed<'a> {
    inner: &'a dyn TargetMetric,
    name: String,
}

impl<'a> TimeReversed<'a> {
    pub fn new(inner: &'a dyn TargetMetric) -> Self {
        Self {
            name: format!("{}-reversed", inner.name()),
            inner,
        }
    }

    fn reflect(p: &[f64]) -> Vec<f64> {
        let mut q = p.to_vec();
        q[0] = -q[0];
        q
    }
}

impl TargetMetric for TimeReversed<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn spatial(&self, p: &[f64]) -> DMatrix<f64> {
        self.inner.spatial(&Self::reflect(p))
    }

    fn analytic_christoffel(&self, p: &[f64]) -> Option<Christoffel> {
        let c = self.inner.analytic_christoffel(&Self::reflect(p))?;
        let n = c.dimension();
        let sign = |i: usize| if i == 0 { -1.0 } else { 1.0 };
        let mut out = Christoffel::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    out.set(a, b, d, sign(a) * sign(b) * sign(d) * c.get(a, b, d));
                }
            }
        }
        Some(out)
    }

    fn injectivity_radius(&self) -> f64 {
        self.inner.injectivity_radius()
    }

    fn fd_step(&self) -> f64 {
        self.inner.fd_step()
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reversed_analytic_agrees_with_finite_differences() {
        let base = Flrw::new(3, Box::new(ExponentialScale::new(0.4)));
        let rev = TimeReversed::new(&base);
        for &t in &[-0.8, -0.1, 0.3] {
            let p = [t, 0.2, -0.5];
            let a = christoffel(&rev, &p).unwrap();
            let f = christoffel_fd(&rev, &p).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        assert_relative_eq!(a.get(i, j, k), f.get(i, j, k), epsilon = 1e-8);
                    }
                }
            }
        }
        let g = metric_eval(&rev, &[-1.0, 0.0, 0.0]).unwrap();
        let h = metric_eval(&base, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(g, h);
    }
}
