//! Call-by-value evaluation. `reference` is a direct substitution evaluator
//! that returns terms; `compiled` runs de Bruijn code over an environment and
//! is what bulk verification uses.

pub mod compiled;
pub mod reference;

use thiserror::Error;

pub use compiled::{Compiled, Machine, Value};
pub use reference::evaluate;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("descent violation for {relation}: guard holds at {at} but the step is not below it")]
    DescentViolation { relation: String, at: String },
    #[error("evaluation stuck: {0}")]
    Stuck(String),
    #[error("native constant {name} failed: {reason}")]
    Native { name: String, reason: String },
}
