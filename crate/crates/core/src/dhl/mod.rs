//! Dialectica triples `{P}<a|α>{Q}`, the rule catalog that builds them, and
//! a falsification-based verifier for their soundness obligation.

pub mod derivation;
pub mod rules;
pub mod script;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::check::{check_formula, CheckError, CheckReport, Generator};
use crate::kernel::normalize::normalize;
use crate::kernel::seq::{fresh_var, fresh_vars, var_terms, zero_term};
use crate::kernel::subst::{constant_names, free_names, free_vars, substitute};
use crate::kernel::syntax::{seq_to_string, term_to_string};
use crate::kernel::typing::type_of;
use crate::kernel::types::seq_arrow;
use crate::kernel::{Name, Term, TypeSeq};
use crate::logic::syntax::formula_to_string;
use crate::logic::{matrix, signature, Formula, LogicError};

pub use derivation::{synthesize, Derivation, EpsilonBinding, SideCondition, SideConditionKind, Status, Synthesis};
pub use rules::{apply_rule, Applied, Params, RuleId, Session};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DhlError {
    #[error("{rule}: expected {expected} premises, found {found}")]
    ArityMismatch {
        rule: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{rule}: missing parameter {param}")]
    MissingParameter { rule: &'static str, param: &'static str },
    #[error("{rule}: {what} should be {expected} but is {found}")]
    ShapeMismatch {
        rule: &'static str,
        what: &'static str,
        expected: String,
        found: String,
    },
    #[error("{rule}: side condition violated: {obligation}: {verdict}")]
    SideConditionViolated {
        rule: &'static str,
        obligation: String,
        verdict: String,
    },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("{0} is not purely universal")]
    NotPurelyUniversal(String),
    #[error("{0} is not purely existential")]
    NotPurelyExistential(String),
    #[error("{0} is not quantifier-free")]
    NotQuantifierFree(String),
    #[error("ill-typed realizer: {0}")]
    IllTyped(String),
    #[error("unknown {kind} {name}")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("at {path}: {source}")]
    At { path: String, source: Box<DhlError> },
}

impl DhlError {
    /// The innermost error, without path annotations.
    pub fn root(&self) -> &DhlError {
        match self {
            DhlError::At { source, .. } => source.root(),
            e => e,
        }
    }
}

/// `{pre} <forward | backward> {post}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triple {
    pub pre: Formula,
    pub forward: Vec<Term>,
    pub backward: Vec<Term>,
    pub post: Formula,
}

fn realizers(ts: &[Term]) -> String {
    if ts.is_empty() {
        "-".to_string()
    } else {
        ts.iter().map(term_to_string).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}} <{} | {}> {{{}}}",
            formula_to_string(&self.pre),
            realizers(&self.forward),
            realizers(&self.backward),
            formula_to_string(&self.post)
        )
    }
}

impl Triple {
    pub fn new(pre: Formula, forward: Vec<Term>, backward: Vec<Term>, post: Formula) -> Triple {
        Triple {
            pre,
            forward,
            backward,
            post,
        }
    }

    /// Expected realizer types: `W_P -> W_Q` forward and `W_P, C_Q -> C_P`
    /// backward.
    pub fn realizer_types(&self) -> (TypeSeq, TypeSeq) {
        let (p, q) = (signature(&self.pre), signature(&self.post));
        let fwd = seq_arrow(&p.witnesses, &q.witnesses);
        let dom = [p.witnesses, q.counters].concat();
        (fwd, seq_arrow(&dom, &p.counters))
    }

    /// Checks realizer types against the signatures of the formulas.
    pub fn check(&self) -> Result<(), DhlError> {
        let (fwd, bwd) = self.realizer_types();
        for (what, ts, tys) in [("forward", &self.forward, fwd), ("backward", &self.backward, bwd)] {
            if ts.len() != tys.len() {
                return Err(DhlError::IllTyped(format!(
                    "{what} realizer has {} components, the formulas need {}",
                    ts.len(),
                    tys.len()
                )));
            }
            for (t, ty) in ts.iter().zip(&tys) {
                let found = type_of(t).map_err(|e| DhlError::IllTyped(e.to_string()))?;
                if &found != ty {
                    return Err(DhlError::IllTyped(format!(
                        "{what} component {} has type {found}, expected {ty}",
                        term_to_string(t)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = self.pre.free_names();
        out.extend(self.post.free_names());
        for t in self.forward.iter().chain(&self.backward) {
            out.extend(free_names(t));
        }
        out
    }

    /// `|P -> Q|` at `a, α` and fresh `x, v`, beta-normalized:
    /// `|P|_x^{α x v} -> |Q|_{a x}^v`.
    pub fn obligation(&self) -> Result<Formula, DhlError> {
        let imp = Formula::imp(self.pre.clone(), self.post.clone());
        let (p, q) = (signature(&self.pre), signature(&self.post));
        let mut avoid = self.free_names();
        let xs = fresh_vars("x", &p.witnesses, &mut avoid);
        let vs = fresh_vars("v", &q.counters, &mut avoid);
        let w: Vec<Term> = self.forward.iter().chain(&self.backward).cloned().collect();
        let c: Vec<Term> = var_terms(&xs).into_iter().chain(var_terms(&vs)).collect();
        Ok(matrix(&imp, &w, &c)?.map_terms(&normalize))
    }

    /// Equal up to alpha-conversion and beta-normalization of all terms.
    pub fn same_as(&self, other: &Triple) -> bool {
        same_formula(&self.pre, &other.pre)
            && same_formula(&self.post, &other.post)
            && same_terms(&self.forward, &other.forward)
            && same_terms(&self.backward, &other.backward)
    }

    /// Substitutes epsilon bindings into formulas and realizers.
    pub fn resolve(&self, bindings: &[EpsilonBinding]) -> Triple {
        if bindings.is_empty() {
            return self.clone();
        }
        // Iterate because a later value may mention an earlier epsilon name.
        let mut cur = self.clone();
        for _ in 0..=bindings.len() {
            let names: BTreeSet<Name> = cur
                .forward
                .iter()
                .chain(&cur.backward)
                .flat_map(constant_names)
                .chain(formula_constants(&cur.pre))
                .chain(formula_constants(&cur.post))
                .collect();
            let active: Vec<(&Name, &Term)> = bindings
                .iter()
                .flat_map(|b| b.names.iter().zip(&b.value))
                .filter(|(n, _)| names.contains(*n))
                .collect();
            if active.is_empty() {
                break;
            }
            let map: BTreeMap<Name, Term> =
                active.into_iter().map(|(n, t)| (n.clone(), t.clone())).collect();
            cur = Triple {
                pre: subst_consts_formula(&cur.pre, &map),
                forward: cur.forward.iter().map(|t| subst_consts_term(t, &map)).collect(),
                backward: cur.backward.iter().map(|t| subst_consts_term(t, &map)).collect(),
                post: subst_consts_formula(&cur.post, &map),
            };
        }
        cur
    }

    /// Replaces realizer variables that are not free in `P -> Q` by canonical
    /// zero terms.
    pub fn closed(&self) -> Triple {
        let mut keep = self.pre.free_names();
        keep.extend(self.post.free_names());
        let mut extra = BTreeMap::new();
        for t in self.forward.iter().chain(&self.backward) {
            for (n, ty) in free_vars(t) {
                if !keep.contains(&n) {
                    extra.insert(n, zero_term(&ty));
                }
            }
        }
        if extra.is_empty() {
            return self.clone();
        }
        Triple {
            pre: self.pre.clone(),
            forward: self.forward.iter().map(|t| normalize(&substitute(t, &extra))).collect(),
            backward: self.backward.iter().map(|t| normalize(&substitute(t, &extra))).collect(),
            post: self.post.clone(),
        }
    }
}

fn formula_constants(p: &Formula) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect(p, &mut out);
    fn collect(p: &Formula, out: &mut BTreeSet<Name>) {
        match p {
            Formula::Eq(a, b) => {
                out.extend(constant_names(a));
                out.extend(constant_names(b));
            }
            Formula::Top | Formula::Bot => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                collect(a, out);
                collect(b, out);
            }
            Formula::OrT(t, a, b) => {
                out.extend(constant_names(t));
                collect(a, out);
                collect(b, out);
            }
            Formula::Forall(_, _, b) | Formula::Exists(_, _, b) => collect(b, out),
        }
    }
    out
}

fn subst_consts_term(t: &Term, map: &BTreeMap<Name, Term>) -> Term {
    crate::kernel::subst::substitute_consts(t, map)
}

/// Constant-to-term substitution through binders: constants become fresh
/// variables first so the formula substitution can rename binders.
fn subst_consts_formula(p: &Formula, map: &BTreeMap<Name, Term>) -> Formula {
    let mut avoid = p.free_names();
    for t in map.values() {
        avoid.extend(free_names(t));
    }
    let mut as_vars = BTreeMap::new();
    let mut binding = BTreeMap::new();
    for (n, t) in map {
        let ty = match type_of(t) {
            Ok(ty) => ty,
            Err(_) => continue,
        };
        let (v, _) = fresh_var("eps_", &ty, &mut avoid);
        as_vars.insert(n.clone(), Term::Var(v.clone(), ty));
        binding.insert(v, t.clone());
    }
    let opened = p.map_terms(&|t| crate::kernel::subst::substitute_consts(t, &as_vars));
    opened.substitute(&binding)
}

pub fn same_formula(a: &Formula, b: &Formula) -> bool {
    a.map_terms(&normalize).alpha_eq(&b.map_terms(&normalize))
}

pub fn same_terms(a: &[Term], b: &[Term]) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|(x, y)| crate::kernel::normalize::nf_eq(x, y))
}

/// Tests the soundness obligation `∀x,v(|P|_x^{αxv} -> |Q|_{ax}^v)` of a
/// triple. Free variables and uninterpreted constants are read universally.
pub fn verify_triple(triple: &Triple, gen: &Generator) -> Result<CheckReport, DhlError> {
    triple.check()?;
    let phi = triple.obligation()?;
    let mut report = check_formula(gen, "triple", &phi)?;
    report.obligation = triple.to_string();
    Ok(report)
}

pub(crate) fn show_terms(ts: &[Term]) -> String {
    seq_to_string(ts)
}
