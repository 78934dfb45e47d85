use serde::{Deserialize, Serialize};

use super::{ConstantScale, ExponentialScale, Flrw, Minkowski, PolynomialScale, ScaleFactor, TargetMetric};
use crate::registry::{bad_param, Params, Registry, RegistryError};

/// Scale factors by name; each takes the single number `parameter`
/// (`a₀`, `H` or `ε` respectively).
pub fn scale_factor_registry() -> Registry<dyn ScaleFactor> {
    let mut reg: Registry<dyn ScaleFactor> = Registry::new("scale factor");
    reg.register("constant", |p| {
        let a0 = p.number("parameter").unwrap_or(1.0);
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(bad_param("scale factor", "constant", "parameter", "must be positive"));
        }
        Ok(Box::new(ConstantScale::new(a0)))
    });
    reg.register("exponential", |p| {
        let h = p.number("parameter").unwrap_or(0.0);
        if !h.is_finite() {
            return Err(bad_param("scale factor", "exponential", "parameter", "must be finite"));
        }
        Ok(Box::new(ExponentialScale::new(h)))
    });
    reg.register("polynomial", |p| {
        let e = p.number("parameter").unwrap_or(0.0);
        if !e.is_finite() {
            return Err(bad_param("scale factor", "polynomial", "parameter", "must be finite"));
        }
        Ok(Box::new(PolynomialScale::new(e)))
    });
    reg
}

fn dimension(p: &Params, entry: &str) -> Result<usize, RegistryError> {
    let d = p.number("dimension").unwrap_or(3.0);
    if d.fract() != 0.0 || d < 2.0 || d > 16.0 {
        return Err(bad_param("metric", entry, "dimension", "must be an integer in 2..=16"));
    }
    Ok(d as usize)
}

/// Builtin target metrics by name.
///
/// Parameters: `dimension` (default 3); for `flrw` also `scale_factor`
/// (a name from [`scale_factor_registry`]) and `parameter`.
pub fn metric_registry() -> Registry<dyn TargetMetric> {
    let mut reg: Registry<dyn TargetMetric> = Registry::new("metric");
    reg.register("minkowski", |p| Ok(Box::new(Minkowski::new(dimension(p, "minkowski")?))));
    reg.register("flrw", |p| {
        let n = dimension(p, "flrw")?;
        let kind = p.text("scale_factor").unwrap_or("exponential");
        let scale = scale_factor_registry().build(kind, p)?;
        Ok(Box::new(Flrw::new(n, scale)))
    });
    reg
}

/// A serializable metric choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSelection {
    pub kind: String,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub scale_factor: Option<String>,
    #[serde(default)]
    pub parameter: Option<f64>,
}

fn default_dimension() -> usize {
    3
}

impl MetricSelection {
    pub fn minkowski(dimension: usize) -> Self {
        Self {
            kind: "minkowski".into(),
            dimension,
            scale_factor: None,
            parameter: None,
        }
    }

    pub fn flrw(dimension: usize, scale_factor: &str, parameter: f64) -> Self {
        Self {
            kind: "flrw".into(),
            dimension,
            scale_factor: Some(scale_factor.into()),
            parameter: Some(parameter),
        }
    }

    pub fn params(&self) -> Params {
        let mut p = Params::new().with("dimension", self.dimension as f64);
        if let Some(s) = &self.scale_factor {
            p.insert("scale_factor", s.as_str());
        }
        if let Some(x) = self.parameter {
            p.insert("parameter", x);
        }
        p
    }

    pub fn build(&self) -> Result<Box<dyn TargetMetric>, RegistryError> {
        metric_registry().build(&self.kind, &self.params())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_catalog_metrics() {
        let m = MetricSelection::flrw(3, "exponential", 0.1).build().unwrap();
        assert_eq!(m.name(), "flrw-exponential");
        assert_eq!(m.dimension(), 3);
        let m = MetricSelection::minkowski(4).build().unwrap();
        assert_eq!(m.dimension(), 4);
        let bad = MetricSelection::flrw(3, "cubic", 0.1).build();
        assert!(matches!(bad, Err(RegistryError::Unknown { .. })));
        let bad = MetricSelection::minkowski(1).build();
        assert!(matches!(bad, Err(RegistryError::BadParam { .. })));
        assert!(metric_registry().build("desitter", &Params::new()).is_err());
    }
}
