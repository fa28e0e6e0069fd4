//! Reverse-mode derivatives: the backward pass of a `VecR` command applied
//! to a seed covector is the vector-Jacobian product of its forward map.

use super::{run, Command, LoopError, StateModel, VecR, Vector};

/// `seed · J(point)` for the forward map of `c`.
pub fn gradient(model: &VecR, c: &Command, point: &[f64], seed: &[f64], fuel: u64) -> Result<Vec<f64>, LoopError> {
    for v in [point, seed] {
        if v.len() != model.dim {
            return Err(LoopError::DimensionMismatch {
                expected: model.dim,
                found: v.len(),
            });
        }
    }
    for p in c.primitives() {
        if model.primitive(p).is_err() {
            return Err(LoopError::NonDifferentiablePrimitive(p.to_string()));
        }
    }
    let (_, t, _) = run(model, c, Vector::state(point.to_vec()), Vector::dual(seed.to_vec()), fuel)?;
    Ok(t.data)
}
