//! Shared test fixtures: seeded formula grammars, a clause-by-clause
//! reference for the formula translation, and a realizer search.

#![allow(dead_code)]

use dialectica::check::Generator;
use dialectica::dhl::{verify_triple, Triple};
use dialectica::kernel::builtins::{add, monus, pred};
use dialectica::kernel::eval::reference::evaluate;
use dialectica::kernel::seq::fresh_vars;
use dialectica::kernel::subst::free_vars;
use dialectica::kernel::{Name, Term, Type};
use dialectica::logic::Formula;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn nat(x: &str) -> Term {
    Term::var(x, Type::Nat)
}

pub fn order(t: &Type) -> usize {
    match t {
        Type::Arrow(a, b) => (order(a) + 1).max(order(b)),
        _ => 0,
    }
}

pub const FUEL: u64 = 1_000_000;

pub fn nat_value(t: &Term) -> Result<u64, String> {
    let v = evaluate(t, FUEL).map_err(|e| format!("evaluating {t:?}: {e}"))?;
    v.as_numeral().ok_or_else(|| format!("not a numeral: {v:?}"))
}

/// Truth of a closed quantifier-free formula, with terms evaluated by the
/// reference evaluator.
pub fn truth(p: &Formula) -> Result<bool, String> {
    use Formula::*;
    Ok(match p {
        Eq(a, b) => nat_value(a)? == nat_value(b)?,
        Top => true,
        Bot => false,
        And(a, b) => truth(a)? && truth(b)?,
        Or(a, b) => truth(a)? || truth(b)?,
        Imp(a, b) => !truth(a)? || truth(b)?,
        OrT(t, a, b) => {
            if nat_value(t)? == 0 {
                truth(a)?
            } else {
                truth(b)?
            }
        }
        Forall(..) | Exists(..) => return Err("quantifier in a matrix".to_string()),
    })
}

/// Random formulas over a scope of typed variables.
pub struct Grammar {
    /// Quantify over `nat -> nat` as well as `nat`.
    pub fn_vars: bool,
    /// Allow `∨` and `∨_t`.
    pub disjunction: bool,
    /// Antecedents of implications stay shallow so signatures stay first-order.
    pub shallow_antecedents: bool,
    next: usize,
}

impl Grammar {
    pub fn rich() -> Grammar {
        Grammar { fn_vars: true, disjunction: true, shallow_antecedents: false, next: 0 }
    }

    pub fn small() -> Grammar {
        Grammar { fn_vars: false, disjunction: true, shallow_antecedents: true, next: 0 }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    pub fn nat_term<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)], depth: usize) -> Term {
        let nats: Vec<&Name> = scope.iter().filter(|(_, t)| t.is_nat()).map(|(n, _)| n).collect();
        let fns: Vec<&Name> = scope
            .iter()
            .filter(|(_, t)| *t == Type::arrow(Type::Nat, Type::Nat))
            .map(|(n, _)| n)
            .collect();
        let leaf = |rng: &mut R| {
            if !nats.is_empty() && rng.gen_bool(0.6) {
                nat(nats.choose(rng).unwrap())
            } else {
                Term::numeral(rng.gen_range(0..=3))
            }
        };
        if depth == 0 {
            return leaf(rng);
        }
        match rng.gen_range(0..8) {
            0 => Term::suc(self.nat_term(rng, scope, depth - 1)),
            1 => pred(self.nat_term(rng, scope, depth - 1)),
            2 => add(self.nat_term(rng, scope, depth - 1), self.nat_term(rng, scope, depth - 1)),
            3 => monus(self.nat_term(rng, scope, depth - 1), self.nat_term(rng, scope, depth - 1)),
            4 if !fns.is_empty() => {
                let f = fns.choose(rng).unwrap();
                Term::app(Term::var(f, Type::arrow(Type::Nat, Type::Nat)), self.nat_term(rng, scope, depth - 1))
            }
            _ => leaf(rng),
        }
    }

    pub fn atom<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)]) -> Formula {
        match rng.gen_range(0..12) {
            0 => Formula::Top,
            1 => Formula::Bot,
            _ => Formula::eq(self.nat_term(rng, scope, 1), self.nat_term(rng, scope, 1)),
        }
    }

    pub fn qf<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)], depth: usize) -> Formula {
        if depth == 0 || rng.gen_bool(0.5) {
            return self.atom(rng, scope);
        }
        let a = self.qf(rng, scope, depth - 1);
        let b = self.qf(rng, scope, depth - 1);
        match rng.gen_range(0..4) {
            0 => Formula::and(a, b),
            1 => Formula::imp(a, b),
            2 => Formula::not(a),
            _ => Formula::or_t(self.nat_term(rng, scope, 0), a, b),
        }
    }

    fn binder_type<R: Rng>(&self, rng: &mut R) -> Type {
        if self.fn_vars && rng.gen_bool(0.25) {
            Type::arrow(Type::Nat, Type::Nat)
        } else {
            Type::Nat
        }
    }

    pub fn formula<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)], depth: usize) -> Formula {
        if depth == 0 {
            return self.atom(rng, scope);
        }
        let choices = if self.disjunction { 8 } else { 6 };
        match rng.gen_range(0..choices) {
            0 => self.atom(rng, scope),
            1 => Formula::and(self.formula(rng, scope, depth - 1), self.formula(rng, scope, depth - 1)),
            2 => {
                let a = if self.shallow_antecedents {
                    self.shallow(rng, scope)
                } else {
                    self.formula(rng, scope, depth - 1)
                };
                Formula::imp(a, self.formula(rng, scope, depth - 1))
            }
            3 | 4 => {
                let x = self.fresh("x");
                let ty = self.binder_type(rng);
                let mut inner = scope.to_vec();
                inner.push((Name::from(x.as_str()), ty.clone()));
                let body = self.formula(rng, &inner, depth - 1);
                Formula::exists(&x, ty, body)
            }
            5 => {
                let x = self.fresh("y");
                let ty = self.binder_type(rng);
                let mut inner = scope.to_vec();
                inner.push((Name::from(x.as_str()), ty.clone()));
                let body = self.formula(rng, &inner, depth - 1);
                Formula::forall(&x, ty, body)
            }
            6 => Formula::or(self.formula(rng, scope, depth - 1), self.formula(rng, scope, depth - 1)),
            _ => {
                let tag = self.nat_term(rng, scope, 0);
                Formula::or_t(tag, self.formula(rng, scope, depth - 1), self.formula(rng, scope, depth - 1))
            }
        }
    }

    /// Quantifier-free, or a single quantifier over a quantifier-free body.
    pub fn shallow<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)]) -> Formula {
        match rng.gen_range(0..3) {
            0 => self.qf(rng, scope, 1),
            1 => self.exists_qf(rng, scope),
            _ => self.forall_qf(rng, scope),
        }
    }

    pub fn exists_qf<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)]) -> Formula {
        let x = self.fresh("x");
        let mut inner = scope.to_vec();
        inner.push((Name::from(x.as_str()), Type::Nat));
        let body = self.qf(rng, &inner, 1);
        Formula::exists(&x, Type::Nat, body)
    }

    pub fn forall_qf<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)]) -> Formula {
        let y = self.fresh("y");
        let mut inner = scope.to_vec();
        inner.push((Name::from(y.as_str()), Type::Nat));
        let body = self.qf(rng, &inner, 1);
        Formula::forall(&y, Type::Nat, body)
    }

    /// No witnesses: quantifier-free or universally quantified.
    pub fn universal<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)]) -> Formula {
        if rng.gen_bool(0.4) {
            self.qf(rng, scope, 1)
        } else {
            self.forall_qf(rng, scope)
        }
    }

    /// No counterwitnesses.
    pub fn existential<R: Rng>(&mut self, rng: &mut R, scope: &[(Name, Type)]) -> Formula {
        if rng.gen_bool(0.4) {
            self.qf(rng, scope, 1)
        } else {
            self.exists_qf(rng, scope)
        }
    }
}

pub fn unfold_all(p: &Formula) -> Formula {
    use Formula::*;
    match p {
        Eq(..) | Top | Bot => p.clone(),
        And(a, b) => Formula::and(unfold_all(a), unfold_all(b)),
        Or(a, b) => Formula::or(unfold_all(a), unfold_all(b)),
        Imp(a, b) => Formula::imp(unfold_all(a), unfold_all(b)),
        OrT(t, a, b) => Formula::unfold_or_t(t, &unfold_all(a), &unfold_all(b)),
        Forall(x, ty, b) => Forall(x.clone(), ty.clone(), Box::new(unfold_all(b))),
        Exists(x, ty, b) => Exists(x.clone(), ty.clone(), Box::new(unfold_all(b))),
    }
}

/// Reference translation, written from the clauses directly. `∨_t` is first
/// expanded to its defining conjunction, so its signature and matrix come
/// from the `∧` and `->` clauses.
pub mod reference {
    use super::*;

    fn arrows(dom: &[Type], cod: &[Type]) -> Vec<Type> {
        cod.iter().map(|c| Type::arrows(dom, c.clone())).collect()
    }

    fn applied(fs: &[Term], args: &[Term]) -> Vec<Term> {
        fs.iter().map(|f| Term::apps(f.clone(), args.iter().cloned())).collect()
    }

    fn expand(t: &Term, a: &Formula, b: &Formula) -> Formula {
        let z = Formula::eq(t.clone(), Term::Zero);
        Formula::and(
            Formula::imp(z.clone(), a.clone()),
            Formula::imp(Formula::imp(z, Formula::Bot), b.clone()),
        )
    }

    pub fn signature(p: &Formula) -> (Vec<Type>, Vec<Type>) {
        use Formula::*;
        match p {
            Eq(..) | Top | Bot => (vec![], vec![]),
            And(a, b) => {
                let ((wa, ca), (wb, cb)) = (signature(a), signature(b));
                ([wa, wb].concat(), [ca, cb].concat())
            }
            OrT(t, a, b) => signature(&expand(t, a, b)),
            Or(a, b) => {
                let ((wa, ca), (wb, cb)) = (signature(a), signature(b));
                ([vec![Type::Nat], wa, wb].concat(), [ca, cb].concat())
            }
            Imp(a, b) => {
                let ((wa, ca), (wb, cb)) = (signature(a), signature(b));
                let xv = [wa.clone(), cb.clone()].concat();
                ([arrows(&wa, &wb), arrows(&xv, &ca)].concat(), xv)
            }
            Exists(_, ty, b) => {
                let (w, c) = signature(b);
                ([vec![ty.clone()], w].concat(), c)
            }
            Forall(_, ty, b) => {
                let (w, c) = signature(b);
                (arrows(std::slice::from_ref(ty), &w), [vec![ty.clone()], c].concat())
            }
        }
    }

    pub fn matrix(p: &Formula, w: &[Term], c: &[Term]) -> Formula {
        use Formula::*;
        match p {
            Eq(..) | Top | Bot => p.clone(),
            And(a, b) => {
                let (wa, ca) = signature(a);
                Formula::and(
                    matrix(a, &w[..wa.len()], &c[..ca.len()]),
                    matrix(b, &w[wa.len()..], &c[ca.len()..]),
                )
            }
            OrT(t, a, b) => matrix(&expand(t, a, b), w, c),
            Or(a, b) => {
                let (wa, ca) = signature(a);
                let rest = &w[1..];
                let left = matrix(a, &rest[..wa.len()], &c[..ca.len()]);
                let right = matrix(b, &rest[wa.len()..], &c[ca.len()..]);
                expand(&w[0], &left, &right)
            }
            Imp(a, b) => {
                let ((wa, _), (wb, _)) = (signature(a), signature(b));
                let (f, big_f) = w.split_at(wb.len());
                let (x, v) = c.split_at(wa.len());
                Formula::imp(matrix(a, x, &applied(big_f, c)), matrix(b, &applied(f, x), v))
            }
            Exists(x, _, b) => matrix(&b.substitute_one(x, &w[0]), &w[1..], c),
            Forall(y, _, b) => matrix(&b.substitute_one(y, &c[0]), &applied(w, &c[..1]), &c[1..]),
        }
    }
}

/// A random closed-over-scope term of type `ty` built from projections,
/// numerals and the open nat variables; arguments of function type are
/// applied to such terms.
pub fn random_realizer<R: Rng>(rng: &mut R, ty: &Type, open: &[Term]) -> Term {
    let (args, res) = ty.uncurry();
    let args: Vec<Type> = args.into_iter().cloned().collect();
    let res = res.clone();
    let mut avoid = open.iter().flat_map(|t| free_vars(t).into_keys()).collect();
    let binders = fresh_vars("r", &args, &mut avoid);
    let body = body_of(rng, &res, &binders, open, 2);
    binders.iter().rev().fold(body, |acc, (n, t)| Term::lam(n, t.clone(), acc))
}

fn body_of<R: Rng>(rng: &mut R, res: &Type, binders: &[(Name, Type)], open: &[Term], depth: usize) -> Term {
    let mut pool: Vec<Term> = binders
        .iter()
        .filter(|(_, t)| t == res)
        .map(|(n, t)| Term::var(n, t.clone()))
        .collect();
    if res.is_nat() {
        pool.extend(open.iter().cloned());
        for (n, t) in binders {
            let (fargs, fres) = t.uncurry();
            if !fargs.is_empty() && fres.is_nat() && depth > 0 {
                let fargs: Vec<Type> = fargs.into_iter().cloned().collect();
                let call = fargs.iter().map(|a| {
                    if a.is_nat() {
                        body_of(rng, a, binders, open, depth - 1)
                    } else {
                        random_realizer(rng, a, open)
                    }
                });
                let call: Vec<Term> = call.collect();
                pool.push(Term::apps(Term::var(n, t.clone()), call));
            }
        }
    }
    if !res.is_nat() {
        return pool.choose(rng).cloned().unwrap_or_else(|| dialectica::kernel::seq::zero_term(res));
    }
    let pick = |rng: &mut R, pool: &[Term]| {
        if pool.is_empty() || rng.gen_bool(0.2) {
            Term::numeral(rng.gen_range(0..=2))
        } else {
            pool.choose(rng).unwrap().clone()
        }
    };
    let base = pick(rng, &pool);
    if depth == 0 {
        return base;
    }
    match rng.gen_range(0..8) {
        0 => Term::suc(base),
        1 => pred(base),
        2 => add(base, pick(rng, &pool)),
        3 => Term::ite(pick(rng, &pool), base, pick(rng, &pool)),
        _ => base,
    }
}

/// Searches for realizers of `{pre} <a | α> {post}` that pass verification.
pub fn realize<R: Rng>(
    rng: &mut R,
    gen: &Generator,
    pre: &Formula,
    post: &Formula,
    open: &[Term],
    attempts: usize,
) -> Option<Triple> {
    let shape = Triple::new(pre.clone(), vec![], vec![], post.clone());
    let (fwd, bwd) = shape.realizer_types();
    if fwd.iter().chain(&bwd).any(|t| order(t) > 2) {
        return None;
    }
    for _ in 0..attempts {
        let f = fwd.iter().map(|t| random_realizer(rng, t, open)).collect();
        let b = bwd.iter().map(|t| random_realizer(rng, t, open)).collect();
        let t = Triple::new(pre.clone(), f, b, post.clone());
        if matches!(verify_triple(&t, gen), Ok(r) if r.passed()) {
            return Some(t);
        }
    }
    None
}

/// Replaces atoms by other atoms over the same scope, keeping the signature.
pub fn mutate_atoms<R: Rng>(rng: &mut R, g: &mut Grammar, p: &Formula, scope: &[(Name, Type)]) -> Formula {
    use Formula::*;
    match p {
        Eq(..) | Top | Bot => {
            if rng.gen_bool(0.3) {
                g.atom(rng, scope)
            } else {
                p.clone()
            }
        }
        And(a, b) => Formula::and(mutate_atoms(rng, g, a, scope), mutate_atoms(rng, g, b, scope)),
        Or(a, b) => Formula::or(mutate_atoms(rng, g, a, scope), mutate_atoms(rng, g, b, scope)),
        Imp(a, b) => Formula::imp(mutate_atoms(rng, g, a, scope), mutate_atoms(rng, g, b, scope)),
        OrT(t, a, b) => Formula::or_t(t.clone(), mutate_atoms(rng, g, a, scope), mutate_atoms(rng, g, b, scope)),
        Forall(x, ty, b) | Exists(x, ty, b) => {
            let mut inner = scope.to_vec();
            inner.push((x.clone(), ty.clone()));
            let body = Box::new(mutate_atoms(rng, g, b, &inner));
            if matches!(p, Forall(..)) {
                Forall(x.clone(), ty.clone(), body)
            } else {
                Exists(x.clone(), ty.clone(), body)
            }
        }
    }
}
