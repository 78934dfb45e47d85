use serde::{Deserialize, Serialize};

use super::lattice::wrap;
use super::transport::{transport_implicit, transport_pair};
use super::{Lattice, SolverError, StripFields};
use crate::metric::{christoffel, metric_eval, TargetMetric};

/// Progress of the Picard iteration on one strip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardState {
    /// Number of sweeps applied.
    pub iterate: usize,
    /// Sup flip-norm change of the last sweep over all six fields.
    pub change: f64,
    /// Ratios of consecutive changes.
    pub ratios: Vec<f64>,
    /// Largest flip norm of `y − z`, `u − û`, `v − v̂`.
    pub symmetric_defect: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StripOutcome {
    pub fields: StripFields,
    pub state: PicardState,
}

fn mid(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// One application of the iteration map: every field of iterate `m + 1` is
/// obtained by transport against the coefficients of iterate `m`, starting
/// from the fixed data below the strip; `y` is then integrated along ξ from
/// `u` and `z` along η from `v̂`.
///
/// Returns the new iterate and the sup flip-norm change.
pub fn sweep(
    m: &dyn TargetMetric,
    lat: &Lattice,
    prev: &StripFields,
) -> Result<(StripFields, f64), SolverError> {
    let (n, nodes, h) = (lat.n, lat.nodes, lat.h);
    let b = lat.rows() - 1;
    let base_y = &lat.y[b];
    let base_xi = &lat.xi[b - 1];
    let base_eta = &lat.eta[b - 1];
    let mut next = StripFields::zeros(prev.rows, base_y.len());
    let mut change: f64 = 0.0;
    let at = |j: isize| -> std::ops::Range<usize> {
        let j = wrap(j, nodes);
        j * n..(j + 1) * n
    };
    for i in 0..prev.rows {
        let (ym, zm) = if i == 0 { (base_y, base_y) } else { (&prev.y[i - 1], &prev.z[i - 1]) };
        let (um_lo, uhm_lo, vm_lo, vhm_lo) = if i == 0 {
            (base_xi, base_xi, base_eta, base_eta)
        } else {
            (&prev.u[i - 1], &prev.uh[i - 1], &prev.v[i - 1], &prev.vh[i - 1])
        };
        let mut row = StripFields::zeros(1, base_y.len());
        for j in 0..nodes as isize {
            // T = (j, k+1), L = (j−1, k), R = (j+1, k), B = (j, k−1); edges are
            // indexed by their lower node: BR, BL at j, LT at j−1, RT at j+1
            let (l, r, tt) = (at(j - 1), at(j + 1), at(j));
            let (lt, rt, br, bl) = (l.clone(), r.clone(), tt.clone(), tt.clone());
            // coefficients from iterate m
            let zc = mid(&zm[l.clone()], &zm[r.clone()]);
            let yc = mid(&ym[l.clone()], &ym[r.clone()]);
            let vh_c = mid(&vhm_lo[bl.clone()], &prev.vh[i][rt.clone()]);
            let v_c = mid(&vm_lo[bl.clone()], &prev.v[i][rt.clone()]);
            let u_c = mid(&um_lo[br.clone()], &prev.u[i][lt.clone()]);
            let uh_c = mid(&uhm_lo[br.clone()], &prev.uh[i][lt.clone()]);
            let gz = christoffel(m, &zc)?;
            let gy = if zc == yc { gz.clone() } else { christoffel(m, &yc)? };
            // data of iterate m+1 below the diamond
            let (u_lo, uh_lo, v_lo, vh_lo, y_lo, z_lo) = if i == 0 {
                (base_xi, base_xi, base_eta, base_eta, base_y, base_y)
            } else {
                (
                    &next.u[i - 1],
                    &next.uh[i - 1],
                    &next.v[i - 1],
                    &next.vh[i - 1],
                    &next.y[i - 1],
                    &next.z[i - 1],
                )
            };
            let u_new = transport_implicit(&gz, &vh_c, &u_lo[br.clone()], h);
            let uh_new = transport_implicit(&gy, &v_c, &uh_lo[br.clone()], h);
            let (v_new, vh_new) =
                transport_pair(&gz, &gy, &u_c, &uh_c, &v_lo[bl.clone()], &vh_lo[bl.clone()], h);
            let y_new: Vec<f64> = y_lo[l.clone()].iter().zip(&u_new).map(|(a, d)| a + h * d).collect();
            let z_new: Vec<f64> = z_lo[r.clone()].iter().zip(&vh_new).map(|(a, d)| a + h * d).collect();
            if y_new.iter().chain(&z_new).chain(&u_new).chain(&v_new).any(|x| !x.is_finite()) {
                return Err(SolverError::BlowUp {
                    row: b + 1 + i,
                    column: j as usize,
                });
            }
            let g = metric_eval(m, &y_new)?;
            change = change
                .max(g.flip_norm(&diff(&y_new, &prev.y[i][tt.clone()])))
                .max(g.flip_norm(&diff(&z_new, &prev.z[i][tt.clone()])))
                .max(g.flip_norm(&diff(&u_new, &prev.u[i][lt.clone()])))
                .max(g.flip_norm(&diff(&uh_new, &prev.uh[i][lt.clone()])))
                .max(g.flip_norm(&diff(&v_new, &prev.v[i][rt.clone()])))
                .max(g.flip_norm(&diff(&vh_new, &prev.vh[i][rt.clone()])));
            row.y[0][tt.clone()].copy_from_slice(&y_new);
            row.z[0][tt].copy_from_slice(&z_new);
            row.u[0][lt.clone()].copy_from_slice(&u_new);
            row.uh[0][lt].copy_from_slice(&uh_new);
            row.v[0][rt.clone()].copy_from_slice(&v_new);
            row.vh[0][rt].copy_from_slice(&vh_new);
        }
        next.y[i] = std::mem::take(&mut row.y[0]);
        next.z[i] = std::mem::take(&mut row.z[0]);
        next.u[i] = std::mem::take(&mut row.u[0]);
        next.uh[i] = std::mem::take(&mut row.uh[0]);
        next.v[i] = std::mem::take(&mut row.v[0]);
        next.vh[i] = std::mem::take(&mut row.vh[0]);
    }
    Ok((next, change))
}

/// Largest flip norm of `y − z`, `u − û`, `v − v̂` over a strip.
pub fn symmetric_defect(m: &dyn TargetMetric, f: &StripFields, n: usize) -> Result<f64, SolverError> {
    let mut worst: f64 = 0.0;
    for i in 0..f.rows {
        for (c, y) in f.y[i].chunks(n).enumerate() {
            let g = metric_eval(m, y)?;
            let s = c * n..(c + 1) * n;
            worst = worst
                .max(g.flip_norm(&diff(y, &f.z[i][s.clone()])))
                .max(g.flip_norm(&diff(&f.u[i][s.clone()], &f.uh[i][s.clone()])))
                .max(g.flip_norm(&diff(&f.v[i][s.clone()], &f.vh[i][s])));
        }
    }
    Ok(worst)
}

/// Iterates [`sweep`] from `seed` until the change drops to `tol`.
pub fn picard_strip_solve(
    m: &dyn TargetMetric,
    lat: &Lattice,
    seed: StripFields,
    tol: f64,
    max_iter: usize,
) -> Result<StripOutcome, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::PreconditionViolated(format!("tol = {tol} must be positive")));
    }
    if lat.rows() < 2 {
        return Err(SolverError::PreconditionViolated(
            "strips start above the startup row".into(),
        ));
    }
    let mut fields = seed;
    let mut ratios = Vec::new();
    let mut last = f64::NAN;
    for it in 1..=max_iter {
        let (next, change) = sweep(m, lat, &fields)?;
        fields = next;
        if it > 1 && last > 0.0 {
            ratios.push(change / last);
        }
        last = change;
        if change <= tol {
            let defect = symmetric_defect(m, &fields, lat.n)?;
            return Ok(StripOutcome {
                fields,
                state: PicardState {
                    iterate: it,
                    change,
                    ratios,
                    symmetric_defect: defect,
                },
            });
        }
    }
    Err(SolverError::NonConvergence {
        row: lat.rows() - 1,
        iterations: max_iter,
        last_change: last,
        ratio: ratios.last().copied().unwrap_or(f64::NAN),
    })
}
