use std::fmt;

use super::fourier::spectral_derivative;
use crate::registry::Registry;

/// Derivative of one periodic sampled component.
pub trait DerivativeScheme: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    fn derivative(&self, samples: &[f64], period: f64) -> Vec<f64>;
}

/// Exact differentiation of the trigonometric interpolant.
#[derive(Clone, Copy, Debug, Default)]
pub struct Spectral;

impl DerivativeScheme for Spectral {
    fn name(&self) -> &str {
        "spectral"
    }

    fn derivative(&self, samples: &[f64], period: f64) -> Vec<f64> {
        spectral_derivative(samples, period)
    }
}

/// Fourth-order central differences with wraparound.
#[derive(Clone, Copy, Debug, Default)]
pub struct Central4;

impl DerivativeScheme for Central4 {
    fn name(&self) -> &str {
        "central4"
    }

    fn derivative(&self, f: &[f64], period: f64) -> Vec<f64> {
        let n = f.len();
        let h = period / n as f64;
        let at = |j: isize| f[j.rem_euclid(n as isize) as usize];
        (0..n as isize)
            .map(|j| (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h))
            .collect()
    }
}

pub fn derivative_registry() -> Registry<dyn DerivativeScheme> {
    let mut reg: Registry<dyn DerivativeScheme> = Registry::new("derivative scheme");
    reg.register("spectral", |_| Ok(Box::new(Spectral)));
    reg.register("central4", |_| Ok(Box::new(Central4)));
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::Params;
    use std::f64::consts::TAU;

    #[test]
    fn central4_is_fourth_order() {
        let err = |n: usize| {
            let f: Vec<f64> = (0..n).map(|j| (TAU * j as f64 / n as f64).sin()).collect();
            let d = Central4.derivative(&f, TAU);
            (0..n)
                .map(|j| (d[j] - (TAU * j as f64 / n as f64).cos()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(32) / err(64);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn registry_builds_both() {
        let reg = derivative_registry();
        for name in ["spectral", "central4"] {
            assert_eq!(reg.build(name, &Params::new()).unwrap().name(), name);
        }
    }
}
