//! Name-keyed catalogs of interchangeable strategies.
//!
//! Metrics, scale factors, initial curves, analytic oracles, derivative
//! schemes and Picard seeds are all looked up by name at runtime through a
//! [`Registry`], so the CLI can select them from a config file without a
//! hard-coded match on every call site.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A loosely typed parameter value handed to a catalog constructor.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Text(String),
    List(Vec<f64>),
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Number(x)
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::Text(s.to_string())
    }
}

impl From<Vec<f64>> for ParamValue {
    fn from(v: Vec<f64>) -> Self {
        ParamValue::List(v)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("unknown {catalog} `{name}` (known: {known})")]
    Unknown {
        catalog: &'static str,
        name: String,
        known: String,
    },
    #[error("parameter `{name}` for {catalog} `{entry}`: {reason}")]
    BadParam {
        catalog: &'static str,
        entry: String,
        name: String,
        reason: String,
    },
}

/// Named parameters for one catalog entry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, ParamValue>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Self {
        self.values.insert(name.to_string(), value.into());
        self
    }

    pub fn insert(&mut self, name: &str, value: impl Into<ParamValue>) {
        self.values.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.get(name)
    }

    pub fn number(&self, name: &str) -> Option<f64> {
        match self.values.get(name) {
            Some(ParamValue::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        match self.values.get(name) {
            Some(ParamValue::Text(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    pub fn list(&self, name: &str) -> Option<&[f64]> {
        match self.values.get(name) {
            Some(ParamValue::List(v)) => Some(v.as_slice()),
            _ => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ParamValue)> {
        self.values.iter()
    }
}

type Constructor<T> = Box<dyn Fn(&Params) -> Result<Box<T>, RegistryError> + Send + Sync>;

/// A catalog of constructors for trait objects of type `T`, keyed by name.
pub struct Registry<T: ?Sized> {
    catalog: &'static str,
    entries: BTreeMap<String, Constructor<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(catalog: &'static str) -> Self {
        Self {
            catalog,
            entries: BTreeMap::new(),
        }
    }

    pub fn register<F>(&mut self, name: &str, ctor: F)
    where
        F: Fn(&Params) -> Result<Box<T>, RegistryError> + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Box::new(ctor));
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, params: &Params) -> Result<Box<T>, RegistryError> {
        match self.entries.get(name) {
            Some(ctor) => ctor(params),
            None => Err(RegistryError::Unknown {
                catalog: self.catalog,
                name: name.to_string(),
                known: self.names().collect::<Vec<_>>().join(", "),
            }),
        }
    }

    pub fn catalog(&self) -> &'static str {
        self.catalog
    }
}

impl<T: ?Sized> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("catalog", &self.catalog)
            .field("entries", &self.entries.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Fetches a required numeric parameter or reports which one is missing.
pub fn require_number(
    params: &Params,
    catalog: &'static str,
    entry: &str,
    name: &str,
) -> Result<f64, RegistryError> {
    params.number(name).ok_or_else(|| RegistryError::BadParam {
        catalog,
        entry: entry.to_string(),
        name: name.to_string(),
        reason: "missing or not a number".to_string(),
    })
}

pub fn bad_param(
    catalog: &'static str,
    entry: &str,
    name: &str,
    reason: impl Into<String>,
) -> RegistryError {
    RegistryError::BadParam {
        catalog,
        entry: entry.to_string(),
        name: name.to_string(),
        reason: reason.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter {
        fn greet(&self) -> String;
    }

    struct Hello(f64);

    impl Greeter for Hello {
        fn greet(&self) -> String {
            format!("hello {}", self.0)
        }
    }

    #[test]
    fn build_by_name_and_report_unknown() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register("hello", |p| {
            Ok(Box::new(Hello(require_number(p, "greeter", "hello", "x")?)))
        });
        let g = reg.build("hello", &Params::new().with("x", 2.0)).unwrap();
        assert_eq!(g.greet(), "hello 2");

        let err = reg.build("bye", &Params::new()).err().unwrap();
        assert!(err.to_string().contains("unknown greeter `bye`"));
        assert!(err.to_string().contains("hello"));

        let err = reg.build("hello", &Params::new()).err().unwrap();
        assert!(matches!(err, RegistryError::BadParam { .. }));
    }
}
