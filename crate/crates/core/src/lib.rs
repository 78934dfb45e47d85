//! Minimal Lorentzian cylinders (closed-string worldsheets) in globally
//! hyperbolic product spacetimes.
//!
//! The wave-map system is written in characteristic coordinates as a pair
//! of transport equations for the null derivatives `u = ∂_ξ y` and
//! `v = ∂_η y`, discretized on a null lattice and solved strip by strip with
//! a Picard iteration of the doubled system. Strips are appended until the
//! surface crosses a requested time slice.
//!
//! * [`metric`]: target spacetimes, Christoffel symbols, the flip metric.
//! * [`curve`]: closed initial curves, validation, conformal reparametrization.
//! * [`solver`]: strip estimates, Picard strips, continuation.
//! * [`diagnostics`]: conformality, causality, functionals, slices, stability.
//! * [`export`]: surface CSV/JSON.

pub mod curve;
pub mod diagnostics;
pub mod export;
pub mod metric;
pub mod registry;
pub mod solver;

pub use registry::{bad_param, require_number, ParamValue, Params, Registry, RegistryError};
