//! Trigonometric interpolation of periodic samples.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Unnormalized forward DFT of real samples.
pub(crate) fn forward(samples: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT returning the real part, including the `1/N` factor.
pub(crate) fn inverse_real(mut spec: Vec<Complex<f64>>) -> Vec<f64> {
    let n = spec.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re / n as f64).collect()
}

/// Signed wavenumber of DFT bin `k` for `n` samples; the Nyquist bin maps to `0`.
pub(crate) fn wavenumber(k: usize, n: usize) -> f64 {
    if 2 * k < n {
        k as f64
    } else if 2 * k == n {
        0.0
    } else {
        k as f64 - n as f64
    }
}

/// Spectral derivative of periodic samples over one period `period`.
pub fn spectral_derivative(samples: &[f64], period: f64) -> Vec<f64> {
    let n = samples.len();
    let mut spec = forward(samples);
    let omega = TAU / period;
    for (k, c) in spec.iter_mut().enumerate() {
        *c *= Complex::new(0.0, omega * wavenumber(k, n));
    }
    inverse_real(spec)
}

/// Band-limited interpolant of periodic samples, evaluated anywhere.
#[derive(Clone, Debug)]
pub struct FourierSeries {
    period: f64,
    coeffs: Vec<Complex<f64>>,
    n: usize,
}

impl FourierSeries {
    pub fn new(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        let coeffs = forward(samples)
            .into_iter()
            .map(|c| c / n as f64)
            .collect();
        Self { period, coeffs, n }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let theta = TAU * x / self.period;
        let mut acc = self.coeffs[0].re;
        let half = self.n / 2;
        for k in 1..self.n.div_ceil(2) {
            let c = self.coeffs[k];
            let (s, co) = (k as f64 * theta).sin_cos();
            // c_k e^{ikθ} + conj(c_k) e^{-ikθ}
            acc += 2.0 * (c.re * co - c.im * s);
        }
        if self.n % 2 == 0 && half > 0 {
            // split Nyquist bin as a cosine so the interpolant is real
            acc += self.coeffs[half].re * (half as f64 * theta).cos();
        }
        acc
    }

    /// Fraction of non-mean spectral energy in wavenumbers above `3N/8`.
    pub fn high_band_fraction(&self) -> f64 {
        let mut total = 0.0;
        let mut high = 0.0;
        let cut = 3 * self.n / 8;
        for k in 1..self.n {
            let e = self.coeffs[k].norm_sqr();
            total += e;
            if wavenumber(k, self.n).abs() > cut as f64 || 2 * k == self.n {
                high += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            high / total
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivative_of_trig_polynomial_is_exact() {
        let n = 32;
        let p = 4.0;
        let xs: Vec<f64> = (0..n).map(|j| p * j as f64 / n as f64).collect();
        let f: Vec<f64> = xs.iter().map(|x| (TAU * 3.0 * x / p).sin() + 0.5).collect();
        let d = spectral_derivative(&f, p);
        for (x, dv) in xs.iter().zip(&d) {
            assert_relative_eq!(*dv, TAU * 3.0 / p * (TAU * 3.0 * x / p).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolant_reproduces_nodes_and_off_node_values() {
        let n = 16;
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let x = TAU * j as f64 / n as f64;
                x.cos() + 0.25 * (2.0 * x).sin()
            })
            .collect();
        let s = FourierSeries::new(&f, TAU);
        for (j, v) in f.iter().enumerate() {
            assert_relative_eq!(s.eval(TAU * j as f64 / n as f64), *v, epsilon = 1e-13);
        }
        assert_relative_eq!(s.eval(0.3), 0.3f64.cos() + 0.25 * 0.6f64.sin(), epsilon = 1e-13);
        assert!(s.high_band_fraction() < 1e-25);
    }
}
