use std::collections::{BTreeMap, BTreeSet};

use super::term::{name, Name, Term};
use super::types::Type;

/// Free variables with their annotated types.
pub fn free_vars(t: &Term) -> BTreeMap<Name, Type> {
    let mut out = BTreeMap::new();
    collect(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_names(t: &Term) -> BTreeSet<Name> {
    free_vars(t).into_keys().collect()
}

fn collect(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeMap<Name, Type>) {
    match t {
        Term::Var(n, ty) => {
            if !bound.contains(n) {
                out.entry(n.clone()).or_insert_with(|| ty.clone());
            }
        }
        Term::Lam(n, _, b) => {
            bound.push(n.clone());
            collect(b, bound, out);
            bound.pop();
        }
        Term::App(f, a) => {
            collect(f, bound, out);
            collect(a, bound, out);
        }
        Term::Suc(a) => collect(a, bound, out),
        Term::Ite(b, s, e) => {
            collect(b, bound, out);
            collect(s, bound, out);
            collect(e, bound, out);
        }
        Term::WhileRec { guard, step, .. } => {
            collect(guard, bound, out);
            for s in step {
                collect(s, bound, out);
            }
        }
        Term::Zero | Term::Rec { .. } | Term::Const(_) | Term::Opaque(_) => {}
    }
}

/// Every constant name occurring in `t`.
pub fn constant_names(t: &Term) -> BTreeSet<Name> {
    fn go(t: &Term, out: &mut BTreeSet<Name>) {
        match t {
            Term::Const(c) => {
                out.insert(c.name.clone());
            }
            Term::Lam(_, _, b) | Term::Suc(b) => go(b, out),
            Term::App(f, a) => {
                go(f, out);
                go(a, out);
            }
            Term::Ite(b, s, e) => {
                go(b, out);
                go(s, out);
                go(e, out);
            }
            Term::WhileRec { guard, step, .. } => {
                go(guard, out);
                step.iter().for_each(|s| go(s, out));
            }
            Term::Var(..) | Term::Zero | Term::Rec { .. } | Term::Opaque(_) => {}
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut out);
    out
}

/// Appends primes to `base` until it avoids `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let mut candidate = base.to_string();
    while avoid.contains(candidate.as_str()) {
        candidate.push('\'');
    }
    name(&candidate)
}

/// Capture-avoiding simultaneous substitution. Bound variables that would
/// capture a free variable of a replacement are renamed by priming.
pub fn substitute(t: &Term, binding: &BTreeMap<Name, Term>) -> Term {
    if binding.is_empty() {
        return t.clone();
    }
    let mut avoid = BTreeSet::new();
    for r in binding.values() {
        avoid.extend(free_names(r));
    }
    subst_inner(t, binding, &avoid)
}

pub fn substitute_one(t: &Term, var: &Name, replacement: &Term) -> Term {
    let mut b = BTreeMap::new();
    b.insert(var.clone(), replacement.clone());
    substitute(t, &b)
}

fn subst_inner(t: &Term, binding: &BTreeMap<Name, Term>, avoid: &BTreeSet<Name>) -> Term {
    match t {
        Term::Var(n, _) => binding.get(n).cloned().unwrap_or_else(|| t.clone()),
        Term::Lam(x, ty, body) => {
            let mut inner = binding.clone();
            inner.remove(x);
            if inner.is_empty() {
                return t.clone();
            }
            let body_free = free_names(body);
            inner.retain(|k, _| body_free.contains(k));
            if inner.is_empty() {
                return t.clone();
            }
            let clash = inner
                .values()
                .any(|r| free_names(r).contains(x));
            if clash {
                let mut taken = avoid.clone();
                taken.extend(body_free);
                let x2 = fresh_name(x, &taken);
                inner.insert(x.clone(), Term::Var(x2.clone(), ty.clone()));
                let mut avoid2 = avoid.clone();
                avoid2.insert(x2.clone());
                Term::Lam(x2, ty.clone(), Box::new(subst_inner(body, &inner, &avoid2)))
            } else {
                Term::Lam(x.clone(), ty.clone(), Box::new(subst_inner(body, &inner, avoid)))
            }
        }
        Term::App(f, a) => Term::app(subst_inner(f, binding, avoid), subst_inner(a, binding, avoid)),
        Term::Suc(a) => Term::suc(subst_inner(a, binding, avoid)),
        Term::Ite(b, s, e) => Term::ite(
            subst_inner(b, binding, avoid),
            subst_inner(s, binding, avoid),
            subst_inner(e, binding, avoid),
        ),
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => Term::WhileRec {
            relation: relation.clone(),
            guard: Box::new(subst_inner(guard, binding, avoid)),
            step: step.iter().map(|s| subst_inner(s, binding, avoid)).collect(),
            result: result.clone(),
            component: *component,
        },
        Term::Zero | Term::Rec { .. } | Term::Const(_) | Term::Opaque(_) => t.clone(),
    }
}

/// Replaces constants by name. Used to resolve epsilon names.
pub fn substitute_consts(t: &Term, binding: &BTreeMap<Name, Term>) -> Term {
    match t {
        Term::Const(c) => binding.get(&c.name).cloned().unwrap_or_else(|| t.clone()),
        Term::Lam(x, ty, b) => {
            // Replacements are closed or mention only outer variables; rename the
            // binder if it would capture.
            let captures = binding.values().any(|r| free_names(r).contains(x));
            if captures {
                let mut avoid: BTreeSet<Name> = free_names(b);
                for r in binding.values() {
                    avoid.extend(free_names(r));
                }
                let x2 = fresh_name(x, &avoid);
                let renamed = substitute_one(b, x, &Term::Var(x2.clone(), ty.clone()));
                Term::Lam(x2, ty.clone(), Box::new(substitute_consts(&renamed, binding)))
            } else {
                Term::Lam(x.clone(), ty.clone(), Box::new(substitute_consts(b, binding)))
            }
        }
        Term::App(f, a) => Term::app(substitute_consts(f, binding), substitute_consts(a, binding)),
        Term::Suc(a) => Term::suc(substitute_consts(a, binding)),
        Term::Ite(b, s, e) => Term::ite(
            substitute_consts(b, binding),
            substitute_consts(s, binding),
            substitute_consts(e, binding),
        ),
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => Term::WhileRec {
            relation: relation.clone(),
            guard: Box::new(substitute_consts(guard, binding)),
            step: step.iter().map(|s| substitute_consts(s, binding)).collect(),
            result: result.clone(),
            component: *component,
        },
        Term::Var(..) | Term::Zero | Term::Rec { .. } | Term::Opaque(_) => t.clone(),
    }
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha(a, b, &mut Vec::new(), &mut Vec::new())
}

/// Alpha-equality under given binder stacks (innermost last).
pub fn alpha(a: &Term, b: &Term, la: &mut Vec<Name>, lb: &mut Vec<Name>) -> bool {
    match (a, b) {
        (Term::Var(x, tx), Term::Var(y, ty)) => {
            let ix = la.iter().rposition(|n| n == x);
            let iy = lb.iter().rposition(|n| n == y);
            match (ix, iy) {
                (Some(i), Some(j)) => la.len() - i == lb.len() - j,
                (None, None) => x == y && tx == ty,
                _ => false,
            }
        }
        (Term::Lam(x, tx, bx), Term::Lam(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            la.push(x.clone());
            lb.push(y.clone());
            let r = alpha(bx, by, la, lb);
            la.pop();
            lb.pop();
            r
        }
        (Term::App(f1, a1), Term::App(f2, a2)) => alpha(f1, f2, la, lb) && alpha(a1, a2, la, lb),
        (Term::Suc(x), Term::Suc(y)) => alpha(x, y, la, lb),
        (Term::Ite(b1, s1, e1), Term::Ite(b2, s2, e2)) => {
            alpha(b1, b2, la, lb) && alpha(s1, s2, la, lb) && alpha(e1, e2, la, lb)
        }
        (
            Term::WhileRec {
                relation: r1,
                guard: g1,
                step: s1,
                result: u1,
                component: c1,
            },
            Term::WhileRec {
                relation: r2,
                guard: g2,
                step: s2,
                result: u2,
                component: c2,
            },
        ) => {
            r1 == r2
                && u1 == u2
                && c1 == c2
                && s1.len() == s2.len()
                && alpha(g1, g2, la, lb)
                && s1.iter().zip(s2).all(|(x, y)| alpha(x, y, la, lb))
        }
        (Term::Zero, Term::Zero) => true,
        (Term::Rec { .. }, Term::Rec { .. })
        | (Term::Const(_), Term::Const(_))
        | (Term::Opaque(_), Term::Opaque(_)) => a == b,
        _ => false,
    }
}
