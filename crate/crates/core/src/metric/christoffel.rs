use nalgebra::{DMatrix, DVector};

use super::{metric_eval, MetricError, TargetMetric};

/// Christoffel symbols `Γ^a_{bc}` at one point, stored as `a·n² + b·n + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        let n = self.n;
        self.data[(a * n + b) * n + c] = value;
    }

    /// Sets `Γ^a_{bc}` and `Γ^a_{cb}` together.
    pub fn set_sym(&mut self, a: usize, b: usize, c: usize, value: f64) {
        self.set(a, b, c, value);
        self.set(a, c, b, value);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `Γ(v, w)^a = Γ^a_{bc} v^b w^c`.
    pub fn contract(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (a, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for b in 0..n {
                if v[b] == 0.0 {
                    continue;
                }
                let row = &self.data[(a * n + b) * n..(a * n + b + 1) * n];
                let mut inner = 0.0;
                for c in 0..n {
                    inner += row[c] * w[c];
                }
                acc += v[b] * inner;
            }
            *o = acc;
        }
        out
    }

    /// The matrix `A` with `A v = Γ(v, w)`.
    pub fn with_second(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |a, b| {
            (0..n).map(|c| self.get(a, b, c) * w[c]).sum::<f64>()
        })
    }

    /// Largest asymmetry `|Γ^a_{bc} − Γ^a_{cb}|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    m = m.max((self.get(a, b, c) - self.get(a, c, b)).abs());
                }
            }
        }
        m
    }
}

/// Christoffel symbols at `p`: analytic when the metric provides them,
/// central differences of [`metric_eval`] otherwise.
pub fn christoffel(m: &dyn TargetMetric, p: &[f64]) -> Result<Christoffel, MetricError> {
    // evaluate once for the domain and definiteness checks
    metric_eval(m, p)?;
    match m.analytic_christoffel(p) {
        Some(c) => Ok(c),
        None => christoffel_fd(m, p),
    }
}

/// Levi-Civita formula with central-difference metric derivatives, ignoring
/// any analytic symbols the metric may provide.
pub fn christoffel_fd(m: &dyn TargetMetric, p: &[f64]) -> Result<Christoffel, MetricError> {
    let n = m.dimension();
    let g = metric_eval(m, p)?;
    let step = m.fd_step();
    // dg[mu][(a, b)] = ∂_mu g_ab
    let mut dg = Vec::with_capacity(n);
    let mut q = p.to_vec();
    for mu in 0..n {
        q[mu] = p[mu] + step;
        let plus = metric_eval(m, &q)?;
        q[mu] = p[mu] - step;
        let minus = metric_eval(m, &q)?;
        q[mu] = p[mu];
        dg.push((plus.matrix() - minus.matrix()) / (2.0 * step));
    }
    let ginv = g
        .matrix()
        .clone()
        .try_inverse()
        .ok_or_else(|| MetricError::NotPositiveDefinite { point: p.to_vec() })?;
    let mut out = Christoffel::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut acc = 0.0;
                for d in 0..n {
                    let gad = ginv[(a, d)];
                    if gad == 0.0 {
                        continue;
                    }
                    acc += gad * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
                }
                out.set_sym(a, b, c, 0.5 * acc);
            }
        }
    }
    Ok(out)
}

/// Operator norm of `(v, w) ↦ Γ(v, w)` with all three slots measured in the
/// flip metric.
///
/// Vectors are mapped to an `h`-orthonormal frame via the Cholesky factor of
/// `h`, and the norm of the resulting Euclidean bilinear map is maximized by
/// alternating top-singular-vector updates from every basis pair.
pub fn christoffel_operator_norm(m: &dyn TargetMetric, p: &[f64]) -> Result<f64, MetricError> {
    let gamma = christoffel(m, p)?;
    if gamma.is_zero() {
        return Ok(0.0);
    }
    let g = metric_eval(m, p)?;
    let n = gamma.dimension();
    let hm = g.flip_matrix();
    let chol = hm
        .clone()
        .cholesky()
        .ok_or_else(|| MetricError::NotPositiveDefinite { point: p.to_vec() })?;
    let l = chol.l();
    let lt = l.transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or_else(|| MetricError::NotPositiveDefinite { point: p.to_vec() })?;

    // B(a, b) = Lᵀ Γ(L^{-T} a, L^{-T} b); slices M_k = B(·, e_k)
    let frame: Vec<DVector<f64>> = (0..n).map(|k| lt_inv.column(k).into_owned()).collect();
    let slices: Vec<DMatrix<f64>> = frame
        .iter()
        .map(|fk| &lt * gamma.with_second(fk.as_slice()) * &lt_inv)
        .collect();
    let apply = |b: &DVector<f64>| -> DMatrix<f64> {
        let mut mb = DMatrix::zeros(n, n);
        for (k, s) in slices.iter().enumerate() {
            if b[k] != 0.0 {
                mb += s * b[k];
            }
        }
        mb
    };

    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let mut b = DVector::zeros(n);
            b[i] += 1.0;
            b[j] += 1.0;
            b.normalize_mut();
            let mut prev = -1.0;
            for _ in 0..200 {
                let svd = apply(&b).svd(false, true);
                let (k, &sigma) = svd
                    .singular_values
                    .iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1))
                    .expect("non-empty");
                best = best.max(sigma);
                let vt = svd.v_t.expect("requested");
                b = vt.row(k).transpose();
                if (sigma - prev).abs() <= 1e-14 * sigma.max(1.0) {
                    break;
                }
                prev = sigma;
            }
        }
    }
    Ok(best)
}
