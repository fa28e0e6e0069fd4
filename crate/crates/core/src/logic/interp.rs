//! The Dialectica translation `P ↦ ∃x ∀y |P|_x^y`.

use std::collections::BTreeSet;

use super::formula::{Formula, LogicError};
use crate::kernel::normalize::normalize;
use crate::kernel::seq::{apps, fresh_vars, var_terms, Binder};
use crate::kernel::types::{display_seq, seq_arrow};
use crate::kernel::{Name, Term, TypeSeq};

/// Witness and counterwitness types of a formula.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Signature {
    pub witnesses: TypeSeq,
    pub counters: TypeSeq,
}

impl Signature {
    /// `P_∃`: no counterwitnesses.
    pub fn is_existential(&self) -> bool {
        self.counters.is_empty()
    }

    /// `P_∀`: no witnesses.
    pub fn is_universal(&self) -> bool {
        self.witnesses.is_empty()
    }

    /// `P_qf`: neither.
    pub fn is_quantifier_free(&self) -> bool {
        self.witnesses.is_empty() && self.counters.is_empty()
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "witnesses {} counters {}",
            display_seq(&self.witnesses),
            display_seq(&self.counters)
        )
    }
}

pub fn signature(p: &Formula) -> Signature {
    match p {
        Formula::Eq(..) | Formula::Top | Formula::Bot => Signature::default(),
        Formula::And(a, b) | Formula::OrT(_, a, b) => {
            let (sa, sb) = (signature(a), signature(b));
            Signature {
                witnesses: [sa.witnesses, sb.witnesses].concat(),
                counters: [sa.counters, sb.counters].concat(),
            }
        }
        Formula::Or(a, b) => {
            let (sa, sb) = (signature(a), signature(b));
            let mut witnesses = vec![crate::kernel::Type::Nat];
            witnesses.extend(sa.witnesses);
            witnesses.extend(sb.witnesses);
            Signature {
                witnesses,
                counters: [sa.counters, sb.counters].concat(),
            }
        }
        Formula::Imp(a, b) => {
            let (sa, sb) = (signature(a), signature(b));
            let mut witnesses = seq_arrow(&sa.witnesses, &sb.witnesses);
            let back_domain = [sa.witnesses.clone(), sb.counters.clone()].concat();
            witnesses.extend(seq_arrow(&back_domain, &sa.counters));
            Signature {
                witnesses,
                counters: back_domain,
            }
        }
        Formula::Exists(_, ty, body) => {
            let s = signature(body);
            let mut witnesses = vec![ty.clone()];
            witnesses.extend(s.witnesses);
            Signature {
                witnesses,
                counters: s.counters,
            }
        }
        Formula::Forall(_, ty, body) => {
            let s = signature(body);
            let mut counters = vec![ty.clone()];
            counters.extend(s.counters);
            Signature {
                witnesses: seq_arrow(std::slice::from_ref(ty), &s.witnesses),
                counters,
            }
        }
    }
}

/// `|P|_w^c` for arbitrary witness and counterwitness terms. The lengths must
/// match [`signature`].
pub fn matrix(p: &Formula, w: &[Term], c: &[Term]) -> Result<Formula, LogicError> {
    let sig = signature(p);
    if w.len() != sig.witnesses.len() || c.len() != sig.counters.len() {
        return Err(LogicError::ArityMismatch(format!(
            "formula has {sig}, given {} witnesses and {} counters",
            w.len(),
            c.len()
        )));
    }
    Ok(matrix_unchecked(p, w, c))
}

fn matrix_unchecked(p: &Formula, w: &[Term], c: &[Term]) -> Formula {
    match p {
        Formula::Eq(..) | Formula::Top | Formula::Bot => p.clone(),
        Formula::And(a, b) => {
            let sa = signature(a);
            let (wa, wb) = w.split_at(sa.witnesses.len());
            let (ca, cb) = c.split_at(sa.counters.len());
            Formula::and(matrix_unchecked(a, wa, ca), matrix_unchecked(b, wb, cb))
        }
        Formula::OrT(t, a, b) => {
            let sa = signature(a);
            let (wa, wb) = w.split_at(sa.witnesses.len());
            let (ca, cb) = c.split_at(sa.counters.len());
            Formula::or_t(t.clone(), matrix_unchecked(a, wa, ca), matrix_unchecked(b, wb, cb))
        }
        Formula::Or(a, b) => {
            let sa = signature(a);
            let tag = w[0].clone();
            let (wa, wb) = w[1..].split_at(sa.witnesses.len());
            let (ca, cb) = c.split_at(sa.counters.len());
            Formula::or_t(tag, matrix_unchecked(a, wa, ca), matrix_unchecked(b, wb, cb))
        }
        Formula::Imp(a, b) => {
            let (sa, sb) = (signature(a), signature(b));
            let (f, big_f) = w.split_at(sb.witnesses.len());
            let (x, v) = c.split_at(sa.witnesses.len());
            let xv: Vec<Term> = c.to_vec();
            let left = matrix_unchecked(a, x, &apps(big_f, &xv));
            let right = matrix_unchecked(b, &apps(f, x), v);
            Formula::imp(left, right)
        }
        Formula::Exists(x, _, body) => {
            let inst = body.substitute_one(x, &w[0]);
            matrix_unchecked(&inst, &w[1..], c)
        }
        Formula::Forall(x, _, body) => {
            let inst = body.substitute_one(x, &c[0]);
            let fw = apps(w, &c[..1]);
            matrix_unchecked(&inst, &fw, &c[1..])
        }
    }
}

/// The matrix over variables of the given names, typed by the signature.
pub fn dialectica_matrix(
    p: &Formula,
    witness_vars: &[Name],
    counter_vars: &[Name],
) -> Result<Formula, LogicError> {
    let sig = signature(p);
    if witness_vars.len() != sig.witnesses.len() || counter_vars.len() != sig.counters.len() {
        return Err(LogicError::ArityMismatch(format!(
            "formula has {sig}, given {} witness and {} counter names",
            witness_vars.len(),
            counter_vars.len()
        )));
    }
    let w: Vec<Term> = witness_vars
        .iter()
        .zip(&sig.witnesses)
        .map(|(n, t)| Term::Var(n.clone(), t.clone()))
        .collect();
    let c: Vec<Term> = counter_vars
        .iter()
        .zip(&sig.counters)
        .map(|(n, t)| Term::Var(n.clone(), t.clone()))
        .collect();
    Ok(matrix_unchecked(p, &w, &c))
}

/// Fresh witness and counter variables for `p`, named `x1.. / y1..` unless
/// those clash with the formula or `avoid`.
pub fn fresh_translation_vars(
    p: &Formula,
    avoid: &mut BTreeSet<Name>,
) -> (Vec<Binder>, Vec<Binder>) {
    let sig = signature(p);
    avoid.extend(p.free_names());
    avoid.extend(bound_names(p));
    let w = fresh_vars("x", &sig.witnesses, avoid);
    let c = fresh_vars("y", &sig.counters, avoid);
    (w, c)
}

/// The translation with freshly named variables, beta-normalized.
pub fn translate(p: &Formula) -> (Vec<Binder>, Vec<Binder>, Formula) {
    let (w, c) = fresh_translation_vars(p, &mut BTreeSet::new());
    let m = matrix_unchecked(p, &var_terms(&w), &var_terms(&c));
    (w, c, m.map_terms(&normalize))
}

fn bound_names(p: &Formula) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fn go(p: &Formula, out: &mut BTreeSet<Name>) {
        match p {
            Formula::Eq(..) | Formula::Top | Formula::Bot => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::OrT(_, a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::Forall(x, _, b) | Formula::Exists(x, _, b) => {
                out.insert(x.clone());
                go(b, out);
            }
        }
    }
    go(p, &mut out);
    out
}
