use super::fourier::FourierSeries;
use super::{CurveError, InitialCurve, Provenance, ViolationKind, DEFAULT_VALIDATE_TOL};
use crate::metric::{metric_eval, TargetMetric};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalOptions {
    /// RK4 substeps per output node.
    pub refine: usize,
    /// Largest admissible fraction of spectral energy in the top band of
    /// any resampled component.
    pub alias_threshold: f64,
}

impl Default for ConformalOptions {
    fn default() -> Self {
        Self {
            refine: 8,
            alias_threshold: 1e-6,
        }
    }
}

pub fn conformalize(c: &InitialCurve, m: &dyn TargetMetric) -> Result<InitialCurve, CurveError> {
    conformalize_with(c, m, ConformalOptions::default())
}

/// Reparametrizes `c` so that `⟨k₀′,k₀′⟩ = −⟨k₁,k₁⟩` at every node.
///
/// Solves `φ′ = ρ(φ)` with `ρ = √(−⟨k₁,k₁⟩ / ⟨k₀′,k₀′⟩)` by RK4, where `ρ` is
/// the trigonometric interpolant of its nodal values. The new period is
/// `P̃ = ∫₀ᴾ dφ/ρ` and `φ` is rescaled so that `φ(P̃) = P` exactly.
pub fn conformalize_with(
    c: &InitialCurve,
    m: &dyn TargetMetric,
    opts: ConformalOptions,
) -> Result<InitialCurve, CurveError> {
    let blocking: Vec<_> = c
        .validate(m, DEFAULT_VALIDATE_TOL)?
        .into_iter()
        .filter(|v| {
            !matches!(
                v.kind,
                ViolationKind::NormCondition | ViolationKind::PastDirected
            )
        })
        .collect();
    if !blocking.is_empty() {
        return Err(CurveError::Inadmissible(blocking));
    }
    let n = c.n_nodes();
    let period = c.period();
    let tangent = c.tangent();
    let mut rho = Vec::with_capacity(n);
    for j in 0..n {
        let g = metric_eval(m, &c.k0()[j])?;
        let tt = g.inner(&tangent[j], &tangent[j]);
        let kk = g.inner(&c.k1()[j], &c.k1()[j]);
        rho.push((-kk / tt).sqrt());
    }
    let new_period = period / n as f64 * rho.iter().map(|r| 1.0 / r).sum::<f64>();
    let mean = period / new_period;
    if rho.iter().all(|&r| (r - mean).abs() <= 1e-12 * mean) {
        // φ is linear and maps the new nodes onto the old ones
        let period = if (mean - 1.0).abs() <= 1e-12 { period } else { new_period };
        return Ok(InitialCurve::new(period, c.k0().to_vec(), c.k1().to_vec())?
            .with_scheme(c.scheme().clone())
            .with_provenance(Provenance::Conformalized));
    }

    let series = FourierSeries::new(&rho, period);
    let refine = opts.refine.max(1);
    let steps = n * refine;
    let ds = new_period / steps as f64;
    let mut phi = Vec::with_capacity(n + 1);
    let mut p = 0.0f64;
    phi.push(p);
    for step in 0..steps {
        let k1 = series.eval(p);
        let k2 = series.eval(p + 0.5 * ds * k1);
        let k3 = series.eval(p + 0.5 * ds * k2);
        let k4 = series.eval(p + ds * k3);
        let next = p + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(next > p) {
            return Err(CurveError::NonMonotone(p));
        }
        p = next;
        if (step + 1) % refine == 0 {
            phi.push(p);
        }
    }
    let end = phi[n];
    let phi: Vec<f64> = phi[..n].iter().map(|x| x * period / end).collect();

    let resample = |field: &[Vec<f64>]| -> Result<Vec<Vec<f64>>, CurveError> {
        let dim = field[0].len();
        let mut out = vec![vec![0.0; dim]; n];
        for comp in 0..dim {
            let samples: Vec<f64> = field.iter().map(|x| x[comp]).collect();
            let s = FourierSeries::new(&samples, period);
            let new: Vec<f64> = phi.iter().map(|&x| s.eval(x)).collect();
            let fraction = FourierSeries::new(&new, new_period).high_band_fraction();
            if fraction > opts.alias_threshold {
                return Err(CurveError::Aliasing { fraction, n });
            }
            for (o, v) in out.iter_mut().zip(new) {
                o[comp] = v;
            }
        }
        Ok(out)
    };
    let k0 = resample(c.k0())?;
    let k1 = resample(c.k1())?;
    Ok(InitialCurve::new(new_period, k0, k1)?
        .with_scheme(c.scheme().clone())
        .with_provenance(Provenance::Conformalized))
}
