use std::fmt;

use super::{Lattice, StripFields};
use crate::registry::{bad_param, Registry};

/// Initial iterate of the Picard iteration on a strip.
///
/// Any choice consistent with the fixed base data converges to the same
/// discrete fixed point; the seed only affects the iteration count.
pub trait PicardSeed: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;
    /// Iterate 0 for a strip of `rows` rows above the last lattice row.
    fn seed(&self, lattice: &Lattice, rows: usize) -> StripFields;
}

/// Edge values repeated upward from the last known edge row; nodes advanced
/// by `t`-integration of `½(u + v)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstantExtension;

impl PicardSeed for ConstantExtension {
    fn name(&self) -> &str {
        "constant-extension"
    }

    fn seed(&self, lat: &Lattice, rows: usize) -> StripFields {
        let b = lat.rows() - 1;
        let len = lat.y[b].len();
        let mut f = StripFields::zeros(rows, len);
        let xi = &lat.xi[b - 1];
        let eta = &lat.eta[b - 1];
        for i in 0..rows {
            f.u[i].copy_from_slice(xi);
            f.uh[i].copy_from_slice(xi);
            f.v[i].copy_from_slice(eta);
            f.vh[i].copy_from_slice(eta);
            let dt = (i + 1) as f64 * lat.h;
            for c in 0..len {
                let yt = 0.5 * (lat.node_u[b][c] + lat.node_v[b][c]);
                f.y[i][c] = lat.y[b][c] + dt * yt;
            }
            f.z[i] = f.y[i].clone();
        }
        f
    }
}

/// Constant extension with `amount` added to one component of every edge
/// value.
#[derive(Clone, Copy, Debug)]
pub struct PerturbedSeed {
    pub component: usize,
    pub amount: f64,
}

impl PicardSeed for PerturbedSeed {
    fn name(&self) -> &str {
        "perturbed"
    }

    fn seed(&self, lat: &Lattice, rows: usize) -> StripFields {
        let mut f = ConstantExtension.seed(lat, rows);
        let n = lat.n;
        let c = self.component.min(n - 1);
        for field in [&mut f.u, &mut f.uh, &mut f.v, &mut f.vh] {
            for row in field.iter_mut() {
                for node in row.chunks_mut(n) {
                    node[c] += self.amount;
                }
            }
        }
        f
    }
}

/// Seeds by name: `constant-extension`, and `perturbed` with parameters
/// `component` (default 1) and `amount` (default 0.1).
pub fn seed_registry() -> Registry<dyn PicardSeed> {
    let mut reg: Registry<dyn PicardSeed> = Registry::new("picard seed");
    reg.register("constant-extension", |_| Ok(Box::new(ConstantExtension)));
    reg.register("perturbed", |p| {
        let component = p.number("component").unwrap_or(1.0);
        if component < 0.0 || component.fract() != 0.0 {
            return Err(bad_param("picard seed", "perturbed", "component", "must be a component index"));
        }
        let amount = p.number("amount").unwrap_or(0.1);
        if !amount.is_finite() {
            return Err(bad_param("picard seed", "perturbed", "amount", "must be finite"));
        }
        Ok(Box::new(PerturbedSeed {
            component: component as usize,
            amount,
        }))
    });
    reg
}
