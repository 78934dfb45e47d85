//! Run configuration: a TOML file with `[metric]`, `[curve]`, `[solver]`,
//! `[output]` and `[study]` sections. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use worldsheet::metric::MetricSelection;
use worldsheet::solver::{DeltaPolicy, SolverOptions};
use worldsheet::{ParamValue, Params};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {error}")]
    Read { path: PathBuf, error: std::io::Error },
    #[error("{path}: {error}")]
    Parse {
        path: PathBuf,
        error: Box<toml::de::Error>,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSelection,
    pub curve: CurveSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub study: StudySection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    /// Catalog id (`circle`, `ellipse`, `antitangent-circle`).
    #[serde(default)]
    pub kind: Option<String>,
    /// Node file to read instead of a catalog curve.
    #[serde(default)]
    pub file: Option<PathBuf>,
    /// Number of nodes N for catalog curves.
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub params: BTreeMap<String, ParamEntry>,
    /// Derivative scheme id (`spectral`, `central4`).
    #[serde(default = "default_derivative")]
    pub derivative: String,
    /// Reparametrize to conformal data before solving.
    #[serde(default = "yes")]
    pub conformalize: bool,
    /// Remove the `k₀′` component of `k₁` before validation.
    #[serde(default)]
    pub project_velocity: bool,
}

/// A parameter value as written in TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamEntry {
    Number(f64),
    Text(String),
    List(Vec<f64>),
}

impl From<&ParamEntry> for ParamValue {
    fn from(p: &ParamEntry) -> Self {
        match p {
            ParamEntry::Number(x) => ParamValue::Number(*x),
            ParamEntry::Text(s) => ParamValue::Text(s.clone()),
            ParamEntry::List(v) => ParamValue::List(v.clone()),
        }
    }
}

pub fn to_params(map: &BTreeMap<String, ParamEntry>) -> Params {
    let mut p = Params::new();
    for (k, v) in map {
        p.insert(k, ParamValue::from(v));
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// Slice `y⁰ = T` to reach; below the data for backward runs.
    #[serde(default = "default_target")]
    pub target_time: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Null tolerance on conformalized initial data, relative to the flip norm.
    #[serde(default = "default_tol_null")]
    pub tol_null: f64,
    #[serde(default = "default_tol_causal")]
    pub tol_causal: f64,
    /// Largest accepted null drift on the computed surface.
    #[serde(default = "default_tol_drift")]
    pub tol_drift: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_delta")]
    pub delta: DeltaPolicy,
    #[serde(default = "default_seed")]
    pub seed: String,
    #[serde(default)]
    pub seed_params: BTreeMap<String, ParamEntry>,
    #[serde(default = "default_patience")]
    pub starvation_patience: usize,
    #[serde(default = "default_max_rows")]
    pub max_rows: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            target_time: default_target(),
            tol: default_tol(),
            tol_null: default_tol_null(),
            tol_causal: default_tol_causal(),
            tol_drift: default_tol_drift(),
            max_iter: default_max_iter(),
            delta: default_delta(),
            seed: default_seed(),
            seed_params: BTreeMap::new(),
            starvation_patience: default_patience(),
            max_rows: default_max_rows(),
        }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            delta: self.delta.clone(),
            starvation_patience: self.starvation_patience,
            max_rows: self.max_rows,
            seed: self.seed.clone(),
            seed_params: to_params(&self.seed_params),
            ..SolverOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Surface formats to write: any of `json`, `csv`.
    #[serde(default = "default_formats")]
    pub formats: Vec<SurfaceFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default)]
    pub mode: StudyMode,
    /// Resolutions `N, 2N, …` in a convergence study.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Reference solution for convergence studies; self-convergence if absent.
    #[serde(default)]
    pub oracle: Option<String>,
    #[serde(default)]
    pub oracle_params: BTreeMap<String, ParamEntry>,
    /// Perturbation amplitudes for stability studies.
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            mode: StudyMode::default(),
            levels: default_levels(),
            oracle: None,
            oracle_params: BTreeMap::new(),
            epsilons: default_epsilons(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StudyMode {
    #[default]
    Single,
    Convergence,
    Stability,
    Backward,
}

fn default_nodes() -> usize {
    128
}
fn default_derivative() -> String {
    "spectral".into()
}
fn yes() -> bool {
    true
}
fn default_target() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-10
}
fn default_tol_null() -> f64 {
    1e-10
}
fn default_tol_causal() -> f64 {
    worldsheet::diagnostics::DEFAULT_TOL_CAUSAL
}
fn default_tol_drift() -> f64 {
    1e-5
}
fn default_max_iter() -> usize {
    50
}
fn default_delta() -> DeltaPolicy {
    SolverOptions::default().delta
}
fn default_seed() -> String {
    "constant-extension".into()
}
fn default_patience() -> usize {
    SolverOptions::default().starvation_patience
}
fn default_max_rows() -> usize {
    SolverOptions::default().max_rows
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<SurfaceFormat> {
    vec![SurfaceFormat::Json, SurfaceFormat::Csv]
}
fn default_levels() -> usize {
    3
}
fn default_epsilons() -> Vec<f64> {
    vec![1e-3, 5e-4]
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            error: Box::new(e),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|error| ConfigError::Read {
            path: path.to_path_buf(),
            error,
        })?;
        let mut cfg = Self::parse(&text, path)?;
        // node files are relative to the config file
        if let Some(f) = &cfg.curve.file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.curve.file = Some(dir.join(f));
                }
            }
        }
        Ok(cfg)
    }

    /// Checks the constraints serde cannot express.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        match (&self.curve.kind, &self.curve.file) {
            (None, None) => return bad("curve needs `kind` or `file`".into()),
            (Some(_), Some(_)) => return bad("curve takes `kind` or `file`, not both".into()),
            _ => {}
        }
        let n = self.curve.nodes;
        if self.curve.file.is_none() && (n < 16 || !n.is_power_of_two()) {
            return bad(format!("curve.nodes = {n} must be a power of two, at least 16"));
        }
        if !self.solver.target_time.is_finite() {
            return bad("solver.target_time must be finite".into());
        }
        for (name, x) in [
            ("tol", self.solver.tol),
            ("tol_null", self.solver.tol_null),
            ("tol_causal", self.solver.tol_causal),
            ("tol_drift", self.solver.tol_drift),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("solver.{name} = {x} must be positive"));
            }
        }
        if self.solver.max_iter == 0 {
            return bad("solver.max_iter must be at least 1".into());
        }
        if self.study.mode == StudyMode::Convergence && self.study.levels < 3 {
            return bad(format!("study.levels = {} must be at least 3", self.study.levels));
        }
        if self.study.mode == StudyMode::Stability {
            if self.study.epsilons.is_empty() || self.study.epsilons.iter().any(|e| !(*e != 0.0 && e.is_finite())) {
                return bad("study.epsilons must be nonzero finite amplitudes".into());
            }
            if self.curve.kind.is_none() {
                return bad("stability studies perturb a catalog curve; set curve.kind".into());
            }
        }
        if self.output.formats.is_empty() {
            return bad("output.formats must name at least one format".into());
        }
        Ok(())
    }
}
