//! Falsification testing of quantifier-free obligations over bounded domains.
//! A pass means no counterexample was found within the budget.

pub mod engine;
pub mod generate;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::Term;
use crate::logic::LogicError;

pub use engine::{check_descent, check_formula, check_relation, d_implies, term_equality};
pub use generate::{Candidate, Generator};

/// Domain budget for generated inputs.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Nat inputs range over `0..=nat_max`.
    pub nat_max: u64,
    /// Depth of the function grammar; 0 disables function inputs.
    pub fn_depth: usize,
    pub seed: u64,
    /// Above this many assignments, sample instead of enumerating.
    pub max_instances: u64,
    /// Random lookup tables added to the depth-2 grammar per type.
    pub tables: usize,
    /// Fuel per evaluation.
    pub fuel: u64,
    /// Finite carriers for abstract sorts.
    pub carriers: BTreeMap<String, Vec<Term>>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nat_max: 8,
            fn_depth: 2,
            seed: 0,
            max_instances: 4096,
            tables: 4,
            fuel: 1_000_000,
            carriers: BTreeMap::new(),
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<(), CheckError> {
        if self.max_instances == 0 || self.fuel == 0 {
            return Err(CheckError::BudgetZero);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("budget allows no instances")]
    BudgetZero,
    #[error("no generator for type {0}")]
    UnevaluableHigherType(String),
    #[error("generator input failed to evaluate: {0}")]
    Generator(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("cannot compile obligation: {0}")]
    Compile(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    /// Variable name and the input chosen for it.
    pub assignment: Vec<(String, String)>,
    /// The characteristic value, or the evaluation error.
    pub outcome: String,
}

/// How an obligation was discharged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Syntactic,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub label: String,
    pub obligation: String,
    pub method: Method,
    pub instances: u64,
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }

    pub fn verdict(&self) -> String {
        match &self.counterexample {
            None if self.method == Method::Syntactic => "PASS (syntactic)".to_string(),
            None => format!(
                "PASS (no counterexample within budget, {} {} instances)",
                self.instances,
                if self.method == Method::Exhaustive { "exhaustive" } else { "sampled" }
            ),
            Some(c) => {
                let parts: Vec<String> = c
                    .assignment
                    .iter()
                    .map(|(n, v)| format!("{n} = {v}"))
                    .collect();
                format!("COUNTEREXAMPLE {} ({})", parts.join(", "), c.outcome)
            }
        }
    }
}
