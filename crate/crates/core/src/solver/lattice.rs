use super::{SolutionSurface, SolverError, SurfaceRow};
use crate::curve::NullData;
use crate::metric::{christoffel, metric_eval, TargetMetric};

/// Collapsed lattice state: node positions, edge values and exported node
/// derivatives for every computed row.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub n: usize,
    pub nodes: usize,
    pub h: f64,
    pub period: f64,
    /// `y[k]`: `N·n` node coordinates of row `k`.
    pub y: Vec<Vec<f64>>,
    /// `xi[k]`: `u` on the ξ-edges from row `k` to row `k+1`, indexed by the
    /// lower node.
    pub xi: Vec<Vec<f64>>,
    /// `eta[k]`: `v` on the η-edges from row `k` to row `k+1`, indexed by the
    /// lower node.
    pub eta: Vec<Vec<f64>>,
    pub node_u: Vec<Vec<f64>>,
    pub node_v: Vec<Vec<f64>>,
}

/// The doubled fields `(y, z, u, û, v, v̂)` on a strip of `rows` rows above a
/// base row `b`: node rows `b+1..=b+rows` and edge rows `b..b+rows`.
#[derive(Clone, Debug, PartialEq)]
pub struct StripFields {
    pub rows: usize,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub uh: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub vh: Vec<Vec<f64>>,
}

impl StripFields {
    pub fn zeros(rows: usize, len: usize) -> Self {
        let z = vec![vec![0.0; len]; rows];
        Self {
            rows,
            y: z.clone(),
            z: z.clone(),
            u: z.clone(),
            uh: z.clone(),
            v: z.clone(),
            vh: z,
        }
    }
}

#[inline]
pub(crate) fn wrap(j: isize, n: usize) -> usize {
    j.rem_euclid(n as isize) as usize
}

impl Lattice {
    /// Row 0 from the initial data; node derivatives are copied bit-for-bit.
    pub fn new(data: &NullData, period: f64) -> Self {
        let nodes = data.base.len();
        let n = data.base[0].len();
        Self {
            n,
            nodes,
            h: period / nodes as f64,
            period,
            y: vec![data.base.concat()],
            xi: Vec::new(),
            eta: Vec::new(),
            node_u: vec![data.u.concat()],
            node_v: vec![data.v.concat()],
        }
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub(crate) fn at<'a>(&self, row: &'a [f64], j: isize) -> &'a [f64] {
        let j = wrap(j, self.nodes);
        &row[j * self.n..(j + 1) * self.n]
    }

    /// Computes row 1 and the edges of row 0 from the initial data alone.
    ///
    /// Over each base node the upper edges are `K ± D` with `D` the centred
    /// difference of `k₀` and `K` the velocity advanced half a step, adjusted
    /// so that both edges keep the `g`-norms of the base `u`, `v`.
    pub fn startup(&mut self, m: &dyn TargetMetric) -> Result<(), SolverError> {
        assert_eq!(self.rows(), 1, "startup runs once on a fresh lattice");
        let (n, nodes, h) = (self.n, self.nodes, self.h);
        let y0 = &self.y[0];
        let mut xi = vec![0.0; nodes * n];
        let mut eta = vec![0.0; nodes * n];
        let mut y1 = vec![0.0; nodes * n];
        for j in 0..nodes {
            let ji = j as isize;
            let yl = self.at(y0, ji - 1);
            let yr = self.at(y0, ji + 1);
            let yj = self.at(y0, ji);
            let uj = self.at(&self.node_u[0], ji);
            let vj = self.at(&self.node_v[0], ji);
            let d: Vec<f64> = yr.iter().zip(yl).map(|(r, l)| (r - l) / (2.0 * h)).collect();
            let (ue, ve): (Vec<f64>, Vec<f64>) = if uj.iter().all(|&c| c == 0.0) {
                (vec![0.0; n], d.iter().map(|c| -2.0 * c).collect())
            } else if vj.iter().all(|&c| c == 0.0) {
                (d.iter().map(|c| 2.0 * c).collect(), vec![0.0; n])
            } else {
                let gam = christoffel(m, yj)?.contract(uj, vj);
                let k0: Vec<f64> = (0..n)
                    .map(|a| 0.5 * (uj[a] + vj[a]) - 0.5 * h * gam[a])
                    .collect();
                let yc: Vec<f64> = (0..n).map(|a| 0.5 * (yl[a] + yr[a]) + 0.5 * h * k0[a]).collect();
                let gb = metric_eval(m, yj)?;
                let gc = metric_eval(m, &yc)?;
                let k = norm_preserving_velocity(&k0, &d, gb.inner(uj, uj), gb.inner(vj, vj), |a, b| {
                    gc.inner(a, b)
                });
                (
                    k.iter().zip(&d).map(|(a, b)| a + b).collect(),
                    k.iter().zip(&d).map(|(a, b)| a - b).collect(),
                )
            };
            let jl = wrap(ji - 1, nodes);
            let jr = wrap(ji + 1, nodes);
            xi[jl * n..(jl + 1) * n].copy_from_slice(&ue);
            eta[jr * n..(jr + 1) * n].copy_from_slice(&ve);
            for a in 0..n {
                let from_left = yl[a] + h * ue[a];
                let from_right = yr[a] + h * ve[a];
                y1[j * n + a] = 0.5 * (from_left + from_right);
            }
        }
        check_finite(&y1, 1, n)?;
        self.xi.push(xi);
        self.eta.push(eta);
        self.y.push(y1);
        self.export_nodes(m, 1)?;
        Ok(())
    }

    /// Appends a collapsed strip on top of the current last row.
    pub fn append(&mut self, m: &dyn TargetMetric, f: &StripFields) -> Result<(), SolverError> {
        let base = self.rows() - 1;
        for i in 0..f.rows {
            let row = base + 1 + i;
            let len = f.y[i].len();
            let mut y = vec![0.0; len];
            let mut u = vec![0.0; len];
            let mut v = vec![0.0; len];
            for c in 0..len {
                y[c] = 0.5 * (f.y[i][c] + f.z[i][c]);
                u[c] = 0.5 * (f.u[i][c] + f.uh[i][c]);
                v[c] = 0.5 * (f.v[i][c] + f.vh[i][c]);
            }
            check_finite(&y, row, self.n)?;
            check_finite(&u, row - 1, self.n)?;
            check_finite(&v, row - 1, self.n)?;
            self.y.push(y);
            self.xi.push(u);
            self.eta.push(v);
            self.export_nodes(m, row)?;
        }
        Ok(())
    }

    /// Node values of `u`, `v` on row `k ≥ 1`, obtained by transporting the
    /// neighbouring edge values half a step onto the node.
    fn export_nodes(&mut self, m: &dyn TargetMetric, k: usize) -> Result<(), SolverError> {
        let (n, nodes, h) = (self.n, self.nodes, self.h);
        let mut nu = vec![0.0; nodes * n];
        let mut nv = vec![0.0; nodes * n];
        for j in 0..nodes {
            let ji = j as isize;
            let yt = self.at(&self.y[k], ji);
            let yb = self.at(&self.y[k - 1], ji);
            let yr = self.at(&self.y[k], ji + 1);
            let yl = self.at(&self.y[k], ji - 1);
            // u on the edge crossing (j+½, k−½), v on the edge crossing (j−½, k−½)
            let ue = self.at(&self.xi[k - 1], ji);
            let v_near_u = self.at(&self.eta[k - 1], ji + 1);
            let ve = self.at(&self.eta[k - 1], ji);
            let u_near_v = self.at(&self.xi[k - 1], ji - 1);
            let pu: Vec<f64> = (0..n).map(|a| 0.5 * yt[a] + 0.25 * (yb[a] + yr[a])).collect();
            let pv: Vec<f64> = (0..n).map(|a| 0.5 * yt[a] + 0.25 * (yb[a] + yl[a])).collect();
            let gu = christoffel(m, &pu)?;
            let gv = christoffel(m, &pv)?;
            let half = |g: &crate::metric::Christoffel, a: &[f64], b: &[f64], start: &[f64]| -> Vec<f64> {
                let c = g.contract(a, b);
                start.iter().zip(c).map(|(s, x)| s - 0.5 * h * x).collect()
            };
            let us = half(&gu, ue, v_near_u, ue);
            let vs = half(&gv, ve, u_near_v, ve);
            let avg = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect() };
            let u = half(&gu, &avg(ue, &us), &avg(v_near_u, &vs), ue);
            let v = half(&gv, &avg(ve, &vs), &avg(u_near_v, &us), ve);
            nu[j * n..(j + 1) * n].copy_from_slice(&u);
            nv[j * n..(j + 1) * n].copy_from_slice(&v);
        }
        check_finite(&nu, k, n)?;
        check_finite(&nv, k, n)?;
        self.node_u.push(nu);
        self.node_v.push(nv);
        Ok(())
    }

    /// Smallest time coordinate on row `k`.
    pub fn row_min_time(&self, k: usize) -> f64 {
        self.y[k].iter().step_by(self.n).cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn to_surface(&self, metric: &str) -> SolutionSurface {
        let mut s = SolutionSurface::empty(self.n, self.nodes, self.period, metric);
        s.h = self.h;
        s.rows = (0..self.rows())
            .map(|k| SurfaceRow {
                t: k as f64 * self.h,
                y: self.y[k].clone(),
                u: self.node_u[k].clone(),
                v: self.node_v[k].clone(),
                valid: vec![true; self.nodes],
            })
            .collect();
        s
    }
}

fn check_finite(row: &[f64], k: usize, n: usize) -> Result<(), SolverError> {
    match row.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(SolverError::BlowUp { row: k, column: i / n }),
        None => Ok(()),
    }
}

/// Finds `K = sK⊥ + γD` close to `k0` with `⟨K±D, K±D⟩ = nu, nv`.
/// Falls back to `k0` when no such `K` exists.
fn norm_preserving_velocity(
    k0: &[f64],
    d: &[f64],
    nu: f64,
    nv: f64,
    inner: impl Fn(&[f64], &[f64]) -> f64,
) -> Vec<f64> {
    let dd = inner(d, d);
    if !(dd > 0.0) {
        return k0.to_vec();
    }
    let gamma = (nu - nv) / (4.0 * dd);
    let c = inner(k0, d) / dd;
    let kp: Vec<f64> = k0.iter().zip(d).map(|(k, x)| k - c * x).collect();
    let kk = inner(&kp, &kp);
    let s2 = ((nu + nv) / 2.0 - dd - gamma * gamma * dd) / kk;
    if !(s2 > 0.0 && s2.is_finite()) {
        return k0.to_vec();
    }
    let s = s2.sqrt();
    kp.iter().zip(d).map(|(k, x)| s * k + gamma * x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_hits_requested_norms() {
        let mink = |a: &[f64], b: &[f64]| -a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let k0 = [1.02, 0.01, -0.03];
        let d = [0.0, 0.99, 0.05];
        let k = norm_preserving_velocity(&k0, &d, 0.0, 0.0, mink);
        let up: Vec<f64> = k.iter().zip(&d).map(|(a, b)| a + b).collect();
        let vp: Vec<f64> = k.iter().zip(&d).map(|(a, b)| a - b).collect();
        assert!(mink(&up, &up).abs() < 1e-14);
        assert!(mink(&vp, &vp).abs() < 1e-14);
        assert!((k[0] - k0[0]).abs() < 0.05);
    }
}
