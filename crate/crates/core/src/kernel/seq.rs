//! Meta-level operations on sequences of terms: application, abstraction,
//! fresh variables and canonical zero terms.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{OnceLock, RwLock};

use super::subst::fresh_name;
use super::term::{name, Name, Term};
use super::types::Type;

pub type Binder = (Name, Type);

pub fn var_terms(binders: &[Binder]) -> Vec<Term> {
    binders
        .iter()
        .map(|(n, t)| Term::Var(n.clone(), t.clone()))
        .collect()
}

/// `a b` for sequences: every component of `fs` applied to all of `args`.
pub fn apps(fs: &[Term], args: &[Term]) -> Vec<Term> {
    fs.iter()
        .map(|f| Term::apps(f.clone(), args.iter().cloned()))
        .collect()
}

pub fn lams(binders: &[Binder], body: Term) -> Term {
    binders
        .iter()
        .rev()
        .fold(body, |acc, (n, t)| Term::Lam(n.clone(), t.clone(), Box::new(acc)))
}

/// `λx.c` for sequences: every component abstracted over the same binders.
pub fn lams_seq(binders: &[Binder], bodies: &[Term]) -> Vec<Term> {
    bodies.iter().map(|b| lams(binders, b.clone())).collect()
}

/// Deterministic fresh variables `base1, base2, ...` avoiding `avoid`; the
/// chosen names are added to `avoid`.
pub fn fresh_vars(base: &str, types: &[Type], avoid: &mut BTreeSet<Name>) -> Vec<Binder> {
    let mut out = Vec::with_capacity(types.len());
    for (i, ty) in types.iter().enumerate() {
        let n = fresh_name(&format!("{base}{}", i + 1), avoid);
        avoid.insert(n.clone());
        out.push((n, ty.clone()));
    }
    out
}

pub fn fresh_var(base: &str, ty: &Type, avoid: &mut BTreeSet<Name>) -> Binder {
    let n = fresh_name(base, avoid);
    avoid.insert(n.clone());
    (n, ty.clone())
}

fn sort_defaults() -> &'static RwLock<BTreeMap<String, Term>> {
    static CELL: OnceLock<RwLock<BTreeMap<String, Term>>> = OnceLock::new();
    CELL.get_or_init(|| RwLock::new(BTreeMap::new()))
}

/// Registers the canonical zero of an abstract sort.
pub fn register_sort_default(sort: &str, value: Term) {
    sort_defaults()
        .write()
        .expect("sort default registry poisoned")
        .insert(sort.to_string(), value);
}

/// Canonical zero term of a type: `0`, constant-zero functions, or the
/// registered default of an abstract sort. Unregistered sorts get an
/// uninterpreted constant `0_<sort>`.
pub fn zero_term(ty: &Type) -> Term {
    match ty {
        Type::Nat => Term::Zero,
        Type::Arrow(d, c) => Term::Lam(name("_"), (**d).clone(), Box::new(zero_term(c))),
        Type::Abstract(s) => sort_defaults()
            .read()
            .expect("sort default registry poisoned")
            .get(s.as_ref())
            .cloned()
            .unwrap_or_else(|| {
                Term::constant(super::term::Constant::new(&format!("0_{s}"), ty.clone()))
            }),
    }
}

pub fn zero_terms(types: &[Type]) -> Vec<Term> {
    types.iter().map(zero_term).collect()
}
