//! The workspace file: budgets, seeds, the state model, registered relations
//! and primitive contracts, read from TOML and validated before use.
//!
//! ```toml
//! [budget]
//! nat_max = 8        # nat inputs range over 0..=nat_max
//! fn_depth = 2
//! seed = 0
//!
//! [model]
//! kind = "nat-env"   # or "vec-r" with dim
//!
//! [[relation]]
//! name = "below"
//! carrier = ["nat"]
//! decider = "(lam (y nat) (x nat) (app monus (suc y) x))"
//!
//! [[contract]]
//! prim = "dec:x"
//! pre = "true"
//! post = "true"
//! ```

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::CliError;
use crate::check::Budget;
use crate::dhl::script::relation;
use crate::kernel::sexpr::read_one;
use crate::kernel::syntax::Symbols;
use crate::loopd::{parse_pred, Contract, NatEnv, StateModel, VecR};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    pub nat_max: u64,
    pub fn_depth: usize,
    pub seed: u64,
    pub max_instances: u64,
    pub tables: usize,
    pub fuel: u64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = Budget::default();
        BudgetConfig {
            nat_max: b.nat_max,
            fn_depth: b.fn_depth,
            seed: b.seed,
            max_instances: b.max_instances,
            tables: b.tables,
            fuel: b.fuel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    NatEnv,
    VecR,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default)]
    pub dim: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::NatEnv,
            dim: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationConfig {
    pub name: String,
    pub carrier: Vec<String>,
    pub decider: String,
    #[serde(default)]
    pub measure: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    pub prim: String,
    pub pre: String,
    pub post: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Workspace {
    pub budget: BudgetConfig,
    pub model: ModelConfig,
    #[serde(rename = "relation")]
    pub relations: Vec<RelationConfig>,
    #[serde(rename = "contract")]
    pub contracts: Vec<ContractConfig>,
}

/// The state model selected by the workspace.
pub enum Model {
    Nat(NatEnv),
    Vec(VecR),
}

impl Workspace {
    pub fn from_toml(src: &str) -> Result<Workspace, CliError> {
        let ws: Workspace = toml::from_str(src).map_err(|e| CliError::Config(e.to_string()))?;
        ws.validate()?;
        Ok(ws)
    }

    pub fn load(path: &Path) -> Result<Workspace, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
        Workspace::from_toml(&src)
    }

    pub fn budget(&self) -> Budget {
        let b = &self.budget;
        Budget {
            nat_max: b.nat_max,
            fn_depth: b.fn_depth,
            seed: b.seed,
            max_instances: b.max_instances,
            tables: b.tables,
            fuel: b.fuel,
            ..Budget::default()
        }
    }

    /// Checks every field that a subcommand could trip over later.
    pub fn validate(&self) -> Result<(), CliError> {
        self.budget().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.model.kind == ModelKind::VecR && self.model.dim == Some(0) {
            return Err(CliError::Config("vec-r needs a positive dim".into()));
        }
        if self.model.kind == ModelKind::NatEnv && self.model.dim.is_some() {
            return Err(CliError::Config("dim applies only to vec-r".into()));
        }
        self.symbols()?;
        self.loop_contracts()?;
        Ok(())
    }

    /// The default symbols plus the configured relations.
    pub fn symbols(&self) -> Result<Symbols, CliError> {
        let mut symbols = Symbols::new();
        for r in &self.relations {
            let mut src = format!("(relation {} (carrier {})", r.name, r.carrier.join(" "));
            src.push_str(&format!(" (decider {})", r.decider));
            if let Some(m) = &r.measure {
                src.push_str(&format!(" (measure {m})"));
            }
            src.push(')');
            let rel = read_one(&src)
                .and_then(|s| relation(&s, &symbols))
                .map_err(|e| CliError::Config(format!("relation {}: {e}", r.name)))?;
            symbols.add_relation(Arc::new(rel));
        }
        Ok(symbols)
    }

    pub fn model(&self, dim: Option<usize>) -> Model {
        match self.model.kind {
            ModelKind::NatEnv => Model::Nat(NatEnv::new()),
            ModelKind::VecR => Model::Vec(VecR::new(dim.or(self.model.dim).unwrap_or(1))),
        }
    }

    /// Contracts with parsed predicates; primitive names are checked
    /// against the configured model.
    pub fn loop_contracts(&self) -> Result<Vec<Contract>, CliError> {
        self.contracts
            .iter()
            .map(|k| {
                let known = match self.model(None) {
                    Model::Nat(m) => m.primitive(&k.prim).is_ok(),
                    Model::Vec(m) => m.primitive(&k.prim).is_ok(),
                };
                if !known {
                    return Err(CliError::Config(format!("contract for unknown primitive {}", k.prim)));
                }
                let p = |src: &str| parse_pred(src).map_err(|e| CliError::Config(format!("contract {}: {e}", k.prim)));
                Ok(Contract {
                    prim: k.prim.clone(),
                    pre: p(&k.pre)?,
                    post: p(&k.post)?,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_documented_defaults() {
        let ws = Workspace::from_toml("").unwrap();
        assert_eq!(ws.budget.nat_max, 8);
        assert_eq!(ws.model.kind, ModelKind::NatEnv);
    }

    #[test]
    fn relations_are_type_checked() {
        let good = "[[relation]]\nname = \"below\"\ncarrier = [\"nat\"]\ndecider = \"(lam (y nat) (x nat) (app monus (suc y) x))\"\n";
        let ws = Workspace::from_toml(good).unwrap();
        assert!(ws.symbols().unwrap().relation("below").is_some());
        let bad = good.replace("(app monus (suc y) x)", "(lam (z nat) z)");
        assert!(matches!(Workspace::from_toml(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_and_bad_budgets_are_rejected() {
        assert!(Workspace::from_toml("[budget]\nnat_maxx = 3\n").is_err());
        assert!(Workspace::from_toml("[budget]\nfuel = 0\n").is_err());
        assert!(Workspace::from_toml("[model]\nkind = \"vec-r\"\ndim = 0\n").is_err());
    }

    #[test]
    fn contracts_name_model_primitives() {
        let ok = "[[contract]]\nprim = \"dec:x\"\npre = \"true\"\npost = \"(ge x 0)\"\n";
        assert_eq!(Workspace::from_toml(ok).unwrap().loop_contracts().unwrap().len(), 1);
        assert!(Workspace::from_toml(&ok.replace("dec:x", "frob")).is_err());
    }
}
