use std::f64::consts::TAU;
use std::fmt;

use super::{CurveError, InitialCurve};
use crate::registry::{bad_param, Params, Registry, RegistryError};

/// A parametric family of closed initial curves.
pub trait CurveFamily: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    /// Samples the curve at `n` nodes over `[0, 2π)` in a spacetime of the
    /// given dimension.
    fn sample(&self, n: usize, dimension: usize) -> Result<InitialCurve, CurveError>;
}

/// Planar ellipse `k₀ = t₀e₀ + a sin x e_i + b cos x e_j`, optionally
/// perturbed by `ε cos x e_i`.
///
/// The velocity is `e₀` unless `antitangent` is set, in which case
/// `k₁ = −k₀′` and the data have `u ≡ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarEllipse {
    name: String,
    pub semi_a: f64,
    pub semi_b: f64,
    pub axes: (usize, usize),
    pub time: f64,
    pub epsilon: f64,
    pub antitangent: bool,
}

impl CurveFamily for PlanarEllipse {
    fn name(&self) -> &str {
        &self.name
    }

    fn sample(&self, n: usize, dimension: usize) -> Result<InitialCurve, CurveError> {
        let (i, j) = self.axes;
        if i == 0 || j == 0 || i == j || i >= dimension || j >= dimension {
            return Err(CurveError::Shape(format!(
                "plane axes ({i}, {j}) must be distinct spatial axes below {dimension}"
            )));
        }
        let mut k0 = Vec::with_capacity(n);
        let mut k1 = Vec::with_capacity(n);
        for node in 0..n {
            let x = TAU * node as f64 / n as f64;
            let mut p = vec![0.0; dimension];
            p[0] = self.time;
            p[i] = self.semi_a * x.sin() + self.epsilon * x.cos();
            p[j] = self.semi_b * x.cos();
            k0.push(p);
            let mut k = vec![0.0; dimension];
            if self.antitangent {
                k[i] = -(self.semi_a * x.cos() - self.epsilon * x.sin());
                k[j] = self.semi_b * x.sin();
            } else {
                k[0] = 1.0;
            }
            k1.push(k);
        }
        let curve = InitialCurve::new(TAU, k0, k1)?;
        if !self.antitangent {
            return Ok(curve);
        }
        // take the velocity from the curve's own derivative so that u vanishes
        // to the last bit, not just to spectral accuracy
        let k1 = curve.tangent().into_iter().map(|t| t.iter().map(|c| -c).collect()).collect();
        InitialCurve::new(TAU, curve.k0().to_vec(), k1)
    }
}

fn axes(p: &Params, entry: &str) -> Result<(usize, usize), RegistryError> {
    match p.list("axes") {
        None => Ok((1, 2)),
        Some([a, b]) if a.fract() == 0.0 && b.fract() == 0.0 && *a >= 1.0 && *b >= 1.0 => {
            Ok((*a as usize, *b as usize))
        }
        Some(_) => Err(bad_param("curve", entry, "axes", "expected two spatial axis indices")),
    }
}

fn positive(p: &Params, entry: &str, name: &str, default: f64) -> Result<f64, RegistryError> {
    let x = p.number(name).unwrap_or(default);
    if !(x > 0.0 && x.is_finite()) {
        return Err(bad_param("curve", entry, name, "must be positive"));
    }
    Ok(x)
}

fn finite(p: &Params, entry: &str, name: &str) -> Result<f64, RegistryError> {
    let x = p.number(name).unwrap_or(0.0);
    if !x.is_finite() {
        return Err(bad_param("curve", entry, name, "must be finite"));
    }
    Ok(x)
}

/// Curve families by name.
///
/// * `circle`: `radius` (1), `axes` ([1, 2]), `time` (0), `epsilon` (0).
/// * `ellipse`: `semi_a` (2), `semi_b` (1), `axes`, `time`, `epsilon`.
/// * `antitangent-circle`: `radius`, `axes`, `time`; velocity `−k₀′`.
pub fn curve_registry() -> Registry<dyn CurveFamily> {
    let mut reg: Registry<dyn CurveFamily> = Registry::new("curve");
    reg.register("circle", |p| {
        let r = positive(p, "circle", "radius", 1.0)?;
        Ok(Box::new(PlanarEllipse {
            name: "circle".into(),
            semi_a: r,
            semi_b: r,
            axes: axes(p, "circle")?,
            time: finite(p, "circle", "time")?,
            epsilon: finite(p, "circle", "epsilon")?,
            antitangent: false,
        }))
    });
    reg.register("ellipse", |p| {
        Ok(Box::new(PlanarEllipse {
            name: "ellipse".into(),
            semi_a: positive(p, "ellipse", "semi_a", 2.0)?,
            semi_b: positive(p, "ellipse", "semi_b", 1.0)?,
            axes: axes(p, "ellipse")?,
            time: finite(p, "ellipse", "time")?,
            epsilon: finite(p, "ellipse", "epsilon")?,
            antitangent: false,
        }))
    });
    reg.register("antitangent-circle", |p| {
        let r = positive(p, "antitangent-circle", "radius", 1.0)?;
        Ok(Box::new(PlanarEllipse {
            name: "antitangent-circle".into(),
            semi_a: r,
            semi_b: r,
            axes: axes(p, "antitangent-circle")?,
            time: finite(p, "antitangent-circle", "time")?,
            epsilon: 0.0,
            antitangent: true,
        }))
    });
    reg
}

/// Parses a node file: one node per line, `x_j` followed by the `n`
/// coordinates of `k₀` and the `n` components of `k₁`, whitespace separated.
/// Blank lines and text after `#` are ignored. Nodes must start at `x = 0`
/// and be uniformly spaced; the period is `N·(x₁ − x₀)`.
pub fn parse_node_file(text: &str) -> Result<InitialCurve, CurveError> {
    let mut xs = Vec::new();
    let mut k0 = Vec::new();
    let mut k1 = Vec::new();
    let mut width = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nums: Vec<f64> = body
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| CurveError::Parse {
                    line,
                    message: format!("`{tok}` is not a number"),
                })
            })
            .collect::<Result<_, _>>()?;
        if nums.len() < 5 || nums.len() % 2 == 0 {
            return Err(CurveError::Parse {
                line,
                message: format!("expected 1 + 2n fields with n ≥ 2, found {}", nums.len()),
            });
        }
        if *width.get_or_insert(nums.len()) != nums.len() {
            return Err(CurveError::Parse {
                line,
                message: "field count differs from the first node".into(),
            });
        }
        let n = (nums.len() - 1) / 2;
        xs.push((line, nums[0]));
        k0.push(nums[1..1 + n].to_vec());
        k1.push(nums[1 + n..].to_vec());
    }
    if xs.len() < 2 {
        return Err(CurveError::Parse {
            line: text.lines().count(),
            message: "need at least two nodes".into(),
        });
    }
    let spacing = xs[1].1 - xs[0].1;
    let period = spacing * xs.len() as f64;
    for (j, (line, x)) in xs.iter().enumerate() {
        if (x - spacing * j as f64).abs() > 1e-9 * period.abs().max(1.0) {
            return Err(CurveError::Parse {
                line: *line,
                message: format!("node {j} at x = {x} breaks uniform spacing from x = 0"),
            });
        }
    }
    InitialCurve::new(period, k0, k1)
}
