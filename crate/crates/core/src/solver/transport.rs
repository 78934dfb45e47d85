//! Parallel transport of a vector across one lattice step.

use nalgebra::{DMatrix, DVector};

use super::SolverError;
use crate::metric::{christoffel, Christoffel, TargetMetric};

/// One explicit midpoint step of `∂u = −Γ(y)(u, v)` over a segment of
/// length `h`, given `y` and `v` at both ends of the segment.
pub fn transport_step(
    m: &dyn TargetMetric,
    u_start: &[f64],
    y: [&[f64]; 2],
    v: [&[f64]; 2],
    h: f64,
) -> Result<Vec<f64>, SolverError> {
    let g0 = christoffel(m, y[0])?;
    let k1 = g0.contract(u_start, v[0]);
    let half: Vec<f64> = u_start.iter().zip(&k1).map(|(u, k)| u - 0.5 * h * k).collect();
    let ymid: Vec<f64> = y[0].iter().zip(y[1]).map(|(a, b)| 0.5 * (a + b)).collect();
    let vmid: Vec<f64> = v[0].iter().zip(v[1]).map(|(a, b)| 0.5 * (a + b)).collect();
    let gm = christoffel(m, &ymid)?;
    let k2 = gm.contract(&half, &vmid);
    let out: Vec<f64> = u_start.iter().zip(&k2).map(|(u, k)| u - h * k).collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(SolverError::BlowUp { row: 0, column: 0 });
    }
    Ok(out)
}

/// Implicit midpoint step of `∂u = −Γ(u, w)` with `Γ` and `w` frozen at the
/// centre of the step: solves `(I + ½hA)u₁ = (I − ½hA)u₀`, `A x = Γ(x, w)`.
pub fn transport_implicit(gamma: &Christoffel, w: &[f64], u_start: &[f64], h: f64) -> Vec<f64> {
    let n = u_start.len();
    if gamma.is_zero() || w.iter().all(|&c| c == 0.0) {
        return u_start.to_vec();
    }
    let a = gamma.with_second(w) * (0.5 * h);
    let u0 = DVector::from_column_slice(u_start);
    let rhs = &u0 - &a * &u0;
    let lhs = DMatrix::identity(n, n) + a;
    match lhs.lu().solve(&rhs) {
        Some(x) => x.as_slice().to_vec(),
        None => vec![f64::NAN; n],
    }
}

/// The coupled implicit step for the pair `(v, v̂)` along ξ:
///
/// `v₁ = v₀ − hΓ_z(½(v̂₀+v̂₁), U)` and `v̂₁ = v̂₀ − hΓ_y(½(v₀+v₁), Û)`.
pub(crate) fn transport_pair(
    gz: &Christoffel,
    gy: &Christoffel,
    u_c: &[f64],
    uh_c: &[f64],
    v0: &[f64],
    vh0: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = v0.len();
    let az_zero = gz.is_zero() || u_c.iter().all(|&c| c == 0.0);
    let ay_zero = gy.is_zero() || uh_c.iter().all(|&c| c == 0.0);
    if az_zero && ay_zero {
        return (v0.to_vec(), vh0.to_vec());
    }
    let az = gz.with_second(u_c) * (0.5 * h);
    let ay = gy.with_second(uh_c) * (0.5 * h);
    let v0v = DVector::from_column_slice(v0);
    let vh0v = DVector::from_column_slice(vh0);
    let r1 = &v0v - &az * &vh0v;
    let r2 = &vh0v - &ay * &v0v;
    let mut lhs = DMatrix::identity(2 * n, 2 * n);
    lhs.view_mut((0, n), (n, n)).copy_from(&az);
    lhs.view_mut((n, 0), (n, n)).copy_from(&ay);
    let mut rhs = DVector::zeros(2 * n);
    rhs.rows_mut(0, n).copy_from(&r1);
    rhs.rows_mut(n, n).copy_from(&r2);
    match lhs.lu().solve(&rhs) {
        Some(x) => (x.as_slice()[..n].to_vec(), x.as_slice()[n..].to_vec()),
        None => (vec![f64::NAN; n], vec![f64::NAN; n]),
    }
}
