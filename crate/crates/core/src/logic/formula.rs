use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::kernel::subst::{self, fresh_name, free_names};
use crate::kernel::typing::{infer_type, Context};
use crate::kernel::{name, Name, Term, Type};

/// Formulas over nat equalities. Negation is `A -> ⊥`; quantifiers bind one
/// variable each.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Eq(Term, Term),
    Top,
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `A ∨_t B`, i.e. `(t = 0 -> A) ∧ (t ≠ 0 -> B)`.
    OrT(Term, Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(Name, Type, Box<Formula>),
    Exists(Name, Type, Box<Formula>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("ill-typed formula: {0}")]
    IllTyped(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("not quantifier-free: {0}")]
    NotQuantifierFree(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
}

impl Formula {
    pub fn eq(t: Term, s: Term) -> Formula {
        Formula::Eq(t, s)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn or_t(t: Term, a: Formula, b: Formula) -> Formula {
        Formula::OrT(t, Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::imp(a, Formula::Bot)
    }

    pub fn forall(x: &str, ty: Type, body: Formula) -> Formula {
        Formula::Forall(name(x), ty, Box::new(body))
    }

    pub fn exists(x: &str, ty: Type, body: Formula) -> Formula {
        Formula::Exists(name(x), ty, Box::new(body))
    }

    pub fn forall_many(binders: &[(Name, Type)], body: Formula) -> Formula {
        binders.iter().rev().fold(body, |acc, (n, t)| {
            Formula::Forall(n.clone(), t.clone(), Box::new(acc))
        })
    }

    pub fn exists_many(binders: &[(Name, Type)], body: Formula) -> Formula {
        binders.iter().rev().fold(body, |acc, (n, t)| {
            Formula::Exists(n.clone(), t.clone(), Box::new(acc))
        })
    }

    /// `t =_X s`, elaborated pointwise to nat equalities at higher types.
    pub fn eq_at(t: Term, s: Term, ty: &Type) -> Formula {
        let (args, _) = ty.uncurry();
        if args.is_empty() {
            return Formula::Eq(t, s);
        }
        let mut avoid = free_names(&t);
        avoid.extend(free_names(&s));
        let binders = crate::kernel::seq::fresh_vars(
            "e",
            &args.into_iter().cloned().collect::<Vec<_>>(),
            &mut avoid,
        );
        let vars = crate::kernel::seq::var_terms(&binders);
        Formula::forall_many(
            &binders,
            Formula::Eq(Term::apps(t, vars.clone()), Term::apps(s, vars)),
        )
    }

    /// `χ = 0` style atom for a nat-valued predicate term.
    pub fn holds(t: Term) -> Formula {
        Formula::Eq(t, Term::Zero)
    }

    /// Unfolds `A ∨_t B` into `(t = 0 -> A) ∧ (t ≠ 0 -> B)`.
    pub fn unfold_or_t(t: &Term, a: &Formula, b: &Formula) -> Formula {
        let z = Formula::Eq(t.clone(), Term::Zero);
        Formula::and(
            Formula::imp(z.clone(), a.clone()),
            Formula::imp(Formula::not(z), b.clone()),
        )
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::Top | Formula::Bot => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::OrT(_, a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Eq(..) | Formula::Top | Formula::Bot)
    }

    pub fn free_vars(&self) -> BTreeMap<Name, Type> {
        let mut out = BTreeMap::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        self.free_vars().into_keys().collect()
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeMap<Name, Type>) {
        let term = |t: &Term, bound: &Vec<Name>, out: &mut BTreeMap<Name, Type>| {
            for (n, ty) in subst::free_vars(t) {
                if !bound.contains(&n) {
                    out.entry(n).or_insert(ty);
                }
            }
        };
        match self {
            Formula::Eq(t, s) => {
                term(t, bound, out);
                term(s, bound, out);
            }
            Formula::Top | Formula::Bot => {}
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::OrT(t, a, b) => {
                term(t, bound, out);
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(x, _, body) | Formula::Exists(x, _, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Capture-avoiding simultaneous substitution of terms for variables.
    pub fn substitute(&self, binding: &BTreeMap<Name, Term>) -> Formula {
        if binding.is_empty() {
            return self.clone();
        }
        let mut avoid = BTreeSet::new();
        for r in binding.values() {
            avoid.extend(free_names(r));
        }
        self.subst_inner(binding, &avoid)
    }

    pub fn substitute_one(&self, var: &Name, t: &Term) -> Formula {
        let mut b = BTreeMap::new();
        b.insert(var.clone(), t.clone());
        self.substitute(&b)
    }

    fn subst_inner(&self, binding: &BTreeMap<Name, Term>, avoid: &BTreeSet<Name>) -> Formula {
        let t = |x: &Term| subst::substitute(x, binding);
        match self {
            Formula::Eq(a, b) => Formula::Eq(t(a), t(b)),
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::And(a, b) => Formula::and(a.subst_inner(binding, avoid), b.subst_inner(binding, avoid)),
            Formula::Or(a, b) => Formula::or(a.subst_inner(binding, avoid), b.subst_inner(binding, avoid)),
            Formula::Imp(a, b) => Formula::imp(a.subst_inner(binding, avoid), b.subst_inner(binding, avoid)),
            Formula::OrT(c, a, b) => Formula::or_t(
                t(c),
                a.subst_inner(binding, avoid),
                b.subst_inner(binding, avoid),
            ),
            Formula::Forall(x, ty, body) | Formula::Exists(x, ty, body) => {
                let is_forall = matches!(self, Formula::Forall(..));
                let mut inner = binding.clone();
                inner.remove(x);
                let body_free = body.free_names();
                inner.retain(|k, _| body_free.contains(k));
                if inner.is_empty() {
                    return self.clone();
                }
                let clash = inner.values().any(|r| free_names(r).contains(x));
                let (x2, new_body) = if clash {
                    let mut taken = avoid.clone();
                    taken.extend(body_free);
                    let x2 = fresh_name(x, &taken);
                    inner.insert(x.clone(), Term::Var(x2.clone(), ty.clone()));
                    let mut avoid2 = avoid.clone();
                    avoid2.insert(x2.clone());
                    let nb = body.subst_inner(&inner, &avoid2);
                    (x2, nb)
                } else {
                    (x.clone(), body.subst_inner(&inner, avoid))
                };
                if is_forall {
                    Formula::Forall(x2, ty.clone(), Box::new(new_body))
                } else {
                    Formula::Exists(x2, ty.clone(), Box::new(new_body))
                }
            }
        }
    }

    /// Applies `f` to every term in the formula, including under binders.
    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Formula {
        match self {
            Formula::Eq(a, b) => Formula::Eq(f(a), f(b)),
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::And(a, b) => Formula::and(a.map_terms(f), b.map_terms(f)),
            Formula::Or(a, b) => Formula::or(a.map_terms(f), b.map_terms(f)),
            Formula::Imp(a, b) => Formula::imp(a.map_terms(f), b.map_terms(f)),
            Formula::OrT(c, a, b) => Formula::or_t(f(c), a.map_terms(f), b.map_terms(f)),
            Formula::Forall(x, ty, b) => Formula::Forall(x.clone(), ty.clone(), Box::new(b.map_terms(f))),
            Formula::Exists(x, ty, b) => Formula::Exists(x.clone(), ty.clone(), Box::new(b.map_terms(f))),
        }
    }

    /// Type-checks every term against `ctx` extended by quantifier binders.
    pub fn check(&self, ctx: &Context) -> Result<(), LogicError> {
        let mut ctx = ctx.clone();
        self.check_inner(&mut ctx)
    }

    fn check_inner(&self, ctx: &mut Context) -> Result<(), LogicError> {
        let nat = |t: &Term, ctx: &Context| -> Result<(), LogicError> {
            let ty = infer_type(t, ctx).map_err(|e| LogicError::IllTyped(e.to_string()))?;
            if ty.is_nat() {
                Ok(())
            } else {
                Err(LogicError::IllTyped(format!(
                    "{} has type {ty}, expected nat",
                    crate::kernel::syntax::term_to_string(t)
                )))
            }
        };
        match self {
            Formula::Eq(a, b) => {
                nat(a, ctx)?;
                nat(b, ctx)
            }
            Formula::Top | Formula::Bot => Ok(()),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.check_inner(ctx)?;
                b.check_inner(ctx)
            }
            Formula::OrT(t, a, b) => {
                nat(t, ctx)?;
                a.check_inner(ctx)?;
                b.check_inner(ctx)
            }
            Formula::Forall(x, ty, body) | Formula::Exists(x, ty, body) => {
                let saved = ctx.insert(x.clone(), ty.clone());
                let r = body.check_inner(ctx);
                match saved {
                    Some(old) => ctx.insert(x.clone(), old),
                    None => ctx.remove(x),
                };
                r
            }
        }
    }

    /// Type-checks with free variables taken at their annotated types.
    pub fn check_closed_over_annotations(&self) -> Result<(), LogicError> {
        self.check(&self.free_vars())
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        formula_alpha(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn formula_alpha(a: &Formula, b: &Formula, la: &mut Vec<Name>, lb: &mut Vec<Name>) -> bool {
    use Formula::*;
    match (a, b) {
        (Eq(t1, s1), Eq(t2, s2)) => subst::alpha(t1, t2, la, lb) && subst::alpha(s1, s2, la, lb),
        (Top, Top) | (Bot, Bot) => true,
        (And(a1, b1), And(a2, b2)) | (Or(a1, b1), Or(a2, b2)) | (Imp(a1, b1), Imp(a2, b2)) => {
            formula_alpha(a1, a2, la, lb) && formula_alpha(b1, b2, la, lb)
        }
        (OrT(t1, a1, b1), OrT(t2, a2, b2)) => {
            subst::alpha(t1, t2, la, lb)
                && formula_alpha(a1, a2, la, lb)
                && formula_alpha(b1, b2, la, lb)
        }
        (Forall(x, tx, bx), Forall(y, ty, by)) | (Exists(x, tx, bx), Exists(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            la.push(x.clone());
            lb.push(y.clone());
            let r = formula_alpha(bx, by, la, lb);
            la.pop();
            lb.pop();
            r
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n, Type::Nat)
    }

    #[test]
    fn substitution_renames_quantifiers() {
        let f = Formula::exists("y", Type::Nat, Formula::eq(v("x"), v("y")));
        let g = f.substitute_one(&name("x"), &v("y"));
        assert_eq!(
            g,
            Formula::exists("y'", Type::Nat, Formula::eq(v("y"), v("y'")))
        );
    }

    #[test]
    fn higher_type_equality_is_pointwise() {
        let ty = Type::arrow(Type::Nat, Type::Nat);
        let f = Formula::eq_at(Term::var("f", ty.clone()), Term::var("g", ty.clone()), &ty);
        assert!(matches!(f, Formula::Forall(_, Type::Nat, _)));
        assert!(f.check_closed_over_annotations().is_ok());
    }

    #[test]
    fn alpha_equivalence_of_quantified_formulas() {
        let a = Formula::forall("x", Type::Nat, Formula::eq(v("x"), Term::Zero));
        let b = Formula::forall("z", Type::Nat, Formula::eq(v("z"), Term::Zero));
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&Formula::forall("x", Type::Nat, Formula::eq(v("y"), Term::Zero))));
    }

    #[test]
    fn ill_typed_equalities_are_rejected() {
        let f = Formula::eq(Term::var("f", Type::arrow(Type::Nat, Type::Nat)), Term::Zero);
        assert!(matches!(
            f.check_closed_over_annotations(),
            Err(LogicError::IllTyped(_))
        ));
    }
}
