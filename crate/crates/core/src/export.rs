//! Writers for computed surfaces.
//!
//! Both formats list rows in increasing `k` and columns in increasing `j`,
//! and print floats in shortest round-trip form, so equal surfaces give
//! byte-identical files.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{metric_eval, MetricError, TargetMetric};
use crate::solver::SolutionSurface;

pub const SURFACE_SCHEMA: &str = "worldsheet-surface/1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("unsupported schema `{0}` (expected `{SURFACE_SCHEMA}`)")]
    Schema(String),
}

#[derive(Serialize, Deserialize)]
struct SurfaceDocument<S> {
    schema: String,
    surface: S,
}

/// One line per valid node: `x,t,y…,u…,v…,uu,vv,lambda`.
pub fn write_csv(m: &dyn TargetMetric, s: &SolutionSurface, mut out: impl Write) -> Result<(), ExportError> {
    let n = s.dimension;
    let mut header = String::from("x,t");
    for prefix in ["y", "u", "v"] {
        for i in 0..n {
            write!(header, ",{prefix}{i}").expect("string write");
        }
    }
    header.push_str(",uu,vv,lambda\n");
    out.write_all(header.as_bytes())?;
    let mut line = String::new();
    for k in 0..s.n_rows() {
        for j in 0..s.n_nodes {
            if !s.valid(k, j) {
                continue;
            }
            let g = metric_eval(m, s.y(k, j))?;
            let (u, v) = (s.u(k, j), s.v(k, j));
            let yx = s.y_x(k, j);
            line.clear();
            write!(line, "{},{}", s.x(j), s.t(k)).expect("string write");
            for c in s.y(k, j).iter().chain(u).chain(v) {
                write!(line, ",{c}").expect("string write");
            }
            writeln!(line, ",{},{},{}", g.inner(u, u), g.inner(v, v), g.inner(&yx, &yx)).expect("string write");
            out.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

pub fn write_json(s: &SolutionSurface, out: impl Write) -> Result<(), ExportError> {
    let doc = SurfaceDocument {
        schema: SURFACE_SCHEMA.to_string(),
        surface: s,
    };
    serde_json::to_writer(out, &doc)?;
    Ok(())
}

pub fn read_json(input: impl Read) -> Result<SolutionSurface, ExportError> {
    let doc: SurfaceDocument<serde_json::Value> = serde_json::from_reader(input)?;
    if doc.schema != SURFACE_SCHEMA {
        return Err(ExportError::Schema(doc.schema));
    }
    Ok(serde_json::from_value(doc.surface)?)
}
