//! The rule catalog. Each rule checks the shape of its premises and builds
//! the conclusion's realizers as explicit lambda terms, beta-normalized.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::derivation::{EpsilonBinding, SideCondition, SideConditionKind, Status};
use super::{same_formula, DhlError, Triple};
use crate::check::{check_descent, check_formula, d_implies, term_equality, CheckReport, Generator};
use crate::kernel::builtins::monus;
use crate::kernel::normalize::normalize;
use crate::kernel::operators::{
    compose_backward, compose_forward, make_backward_recursor, make_forward_recursor, make_while_backward,
    make_while_forward,
};
use crate::kernel::seq::{apps, fresh_vars, lams, var_terms, zero_terms, Binder};
use crate::kernel::subst::free_names;
use crate::kernel::syntax::term_to_string;
use crate::kernel::typing::type_of;
use crate::kernel::types::seq_arrow;
use crate::kernel::{Constant, Name, Relation, Term, Type};
use crate::logic::syntax::formula_to_string;
use crate::logic::{chi, matrix, signature, Formula};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    AxEfq,
    AxTop,
    AxId,
    AxUniversal,
    RuleUniversal,
    PermAndR,
    PermAndL,
    PermOrR,
    PermOrL,
    OrR,
    AndL,
    AndR,
    OrL,
    CondL,
    CondR,
    Imp,
    Exp,
    Comp,
    ExistsR,
    ForallL,
    ExistsL,
    ForallR,
    SubstL,
    SubstR,
    EpsilonR,
    EpsilonL,
    Cons,
    Ext,
    Ind,
    While,
    POrLPrime,
    OrRPrime,
    CondLPrime,
    CP,
    N,
    CompNeg,
}

const NAMES: [(RuleId, &str); 36] = [
    (RuleId::AxEfq, "ax-efq"),
    (RuleId::AxTop, "ax-top"),
    (RuleId::AxId, "ax-id"),
    (RuleId::AxUniversal, "ax-universal"),
    (RuleId::RuleUniversal, "rule-universal"),
    (RuleId::PermAndR, "perm-and-r"),
    (RuleId::PermAndL, "perm-and-l"),
    (RuleId::PermOrR, "perm-or-r"),
    (RuleId::PermOrL, "perm-or-l"),
    (RuleId::OrR, "or-r"),
    (RuleId::AndL, "and-l"),
    (RuleId::AndR, "and-r"),
    (RuleId::OrL, "or-l"),
    (RuleId::CondL, "cond-l"),
    (RuleId::CondR, "cond-r"),
    (RuleId::Imp, "imp"),
    (RuleId::Exp, "exp"),
    (RuleId::Comp, "comp"),
    (RuleId::ExistsR, "exists-r"),
    (RuleId::ForallL, "forall-l"),
    (RuleId::ExistsL, "exists-l"),
    (RuleId::ForallR, "forall-r"),
    (RuleId::SubstL, "subst-l"),
    (RuleId::SubstR, "subst-r"),
    (RuleId::EpsilonR, "epsilon-r"),
    (RuleId::EpsilonL, "epsilon-l"),
    (RuleId::Cons, "cons"),
    (RuleId::Ext, "ext"),
    (RuleId::Ind, "ind"),
    (RuleId::While, "while"),
    (RuleId::POrLPrime, "p-or-l-prime"),
    (RuleId::OrRPrime, "or-r-prime"),
    (RuleId::CondLPrime, "cond-l-prime"),
    (RuleId::CP, "cp"),
    (RuleId::N, "n"),
    (RuleId::CompNeg, "comp-neg"),
];

impl RuleId {
    pub fn all() -> impl Iterator<Item = RuleId> {
        NAMES.iter().map(|(r, _)| *r)
    }

    pub fn name(self) -> &'static str {
        NAMES.iter().find(|(r, _)| *r == self).map(|(_, n)| *n).unwrap()
    }

    pub fn parse(s: &str) -> Option<RuleId> {
        NAMES.iter().find(|(_, n)| *n == s).map(|(r, _)| *r)
    }

    /// Number of triple premises.
    pub fn arity(self) -> usize {
        use RuleId::*;
        match self {
            AxEfq | AxTop | AxId | AxUniversal => 0,
            CondL | CondR | Comp | CondLPrime | CompNeg => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule parameters. Which fields a rule reads is listed on [`apply_rule`].
#[derive(Clone, Debug, Default)]
pub struct Params {
    pub pre: Option<Formula>,
    pub post: Option<Formula>,
    /// The side formula added by weakening rules (`R` in `or-r`, `and-l`).
    pub other: Option<Formula>,
    /// A quantifier-free guard or test.
    pub phi: Option<Formula>,
    /// A formula with `binders` free: `Q(x)`, `P(x)`.
    pub body: Option<Formula>,
    pub binders: Vec<Binder>,
    /// Instantiating terms `t`.
    pub terms: Vec<Term>,
    pub forward: Vec<Term>,
    pub backward: Vec<Term>,
    pub relation: Option<Arc<Relation>>,
    /// Block length for the epsilon and substitution rules.
    pub count: Option<usize>,
    /// Record side conditions as assumed instead of testing them.
    pub assume: bool,
}

/// State shared across one derivation: the test-input generator and the
/// epsilon names introduced so far.
pub struct Session {
    pub gen: Generator,
    pub epsilons: Vec<EpsilonBinding>,
}

impl Session {
    pub fn new(gen: Generator) -> Session {
        Session {
            gen,
            epsilons: Vec::new(),
        }
    }

    fn epsilon(&mut self, values: &[Term]) -> Result<Vec<Term>, DhlError> {
        let id = self.epsilons.len() + 1;
        let mut names = Vec::new();
        let mut types = Vec::new();
        let mut consts = Vec::new();
        for (i, v) in values.iter().enumerate() {
            let ty = type_of(v).map_err(|e| DhlError::IllTyped(e.to_string()))?;
            let n = if values.len() == 1 {
                format!("eps{id}")
            } else {
                format!("eps{id}_{}", i + 1)
            };
            consts.push(Term::Const(Arc::new(Constant::new(&n, ty.clone()))));
            names.push(Name::from(n.as_str()));
            types.push(ty);
        }
        self.epsilons.push(EpsilonBinding {
            name: format!("eps{id}"),
            names,
            types,
            value: values.to_vec(),
        });
        Ok(consts)
    }
}

pub struct Applied {
    pub conclusion: Triple,
    pub side_conditions: Vec<SideCondition>,
}

fn arity(rule: RuleId, premises: &[Triple]) -> Result<(), DhlError> {
    if premises.len() != rule.arity() {
        return Err(DhlError::ArityMismatch {
            rule: rule.name(),
            expected: rule.arity(),
            found: premises.len(),
        });
    }
    Ok(())
}

fn need<'a, T>(rule: RuleId, v: &'a Option<T>, param: &'static str) -> Result<&'a T, DhlError> {
    v.as_ref().ok_or(DhlError::MissingParameter {
        rule: rule.name(),
        param,
    })
}

fn shape(rule: RuleId, what: &'static str, expected: &str, found: &Formula) -> DhlError {
    DhlError::ShapeMismatch {
        rule: rule.name(),
        what,
        expected: expected.to_string(),
        found: formula_to_string(found),
    }
}

fn expect_same(rule: RuleId, what: &'static str, expected: &Formula, found: &Formula) -> Result<(), DhlError> {
    if same_formula(expected, found) {
        Ok(())
    } else {
        Err(shape(rule, what, &formula_to_string(expected), found))
    }
}

fn split2(rule: RuleId, what: &'static str, p: &Formula) -> Result<(Formula, Formula), DhlError> {
    match p {
        Formula::And(a, b) => Ok(((**a).clone(), (**b).clone())),
        _ => Err(shape(rule, what, "a conjunction", p)),
    }
}

fn split_or_t(rule: RuleId, what: &'static str, p: &Formula) -> Result<(Term, Formula, Formula), DhlError> {
    match p {
        Formula::OrT(t, a, b) => Ok((t.clone(), (**a).clone(), (**b).clone())),
        _ => Err(shape(rule, what, "a tagged disjunction", p)),
    }
}

fn split_imp(rule: RuleId, what: &'static str, p: &Formula) -> Result<(Formula, Formula), DhlError> {
    match p {
        Formula::Imp(a, b) => Ok(((**a).clone(), (**b).clone())),
        _ => Err(shape(rule, what, "an implication", p)),
    }
}

fn double_negated(rule: RuleId, p: &Formula) -> Result<Formula, DhlError> {
    if let Formula::Imp(a, b) = p {
        if let (Formula::Imp(q, c), Formula::Bot) = (&**a, &**b) {
            if **c == Formula::Bot {
                return Ok((**q).clone());
            }
        }
    }
    Err(shape(rule, "postcondition", "a double negation", p))
}

/// Strips `n` leading quantifiers of one kind, renaming their variables to
/// `names` (or keeping them when `names` is empty).
fn open_quantifiers(
    rule: RuleId,
    what: &'static str,
    p: &Formula,
    n: usize,
    existential: bool,
    names: &[Binder],
) -> Result<(Vec<Binder>, Formula), DhlError> {
    let mut cur = p.clone();
    let mut binders = Vec::new();
    for i in 0..n {
        let (x, ty, body) = match (&cur, existential) {
            (Formula::Exists(x, ty, b), true) | (Formula::Forall(x, ty, b), false) => {
                (x.clone(), ty.clone(), (**b).clone())
            }
            _ => {
                let kind = if existential { "existential" } else { "universal" };
                return Err(shape(rule, what, &format!("{n} leading {kind} quantifiers"), p));
            }
        };
        cur = match names.get(i) {
            Some((y, yty)) => {
                if *yty != ty {
                    return Err(DhlError::ShapeMismatch {
                        rule: rule.name(),
                        what,
                        expected: format!("binder of type {ty}"),
                        found: format!("{y} of type {yty}"),
                    });
                }
                binders.push((y.clone(), ty.clone()));
                body.substitute_one(&x, &Term::Var(y.clone(), ty))
            }
            None => {
                binders.push((x, ty));
                body
            }
        };
    }
    Ok((binders, cur))
}

fn instantiate(body: &Formula, binders: &[Binder], terms: &[Term]) -> Formula {
    let map = binders
        .iter()
        .map(|(n, _)| n.clone())
        .zip(terms.iter().cloned())
        .collect();
    body.substitute(&map)
}

fn check_terms_fit(rule: RuleId, binders: &[Binder], terms: &[Term]) -> Result<(), DhlError> {
    if binders.len() != terms.len() {
        return Err(DhlError::ShapeMismatch {
            rule: rule.name(),
            what: "instantiating terms",
            expected: format!("{} terms", binders.len()),
            found: format!("{} terms", terms.len()),
        });
    }
    for ((x, ty), t) in binders.iter().zip(terms) {
        let found = type_of(t).map_err(|e| DhlError::IllTyped(e.to_string()))?;
        if &found != ty {
            return Err(DhlError::IllTyped(format!(
                "{} instantiates {x} of type {ty} but has type {found}",
                term_to_string(t)
            )));
        }
    }
    Ok(())
}

/// Fresh variable supply avoiding everything in sight.
struct Fresh(BTreeSet<Name>);

impl Fresh {
    fn new(premises: &[Triple], params: &Params) -> Fresh {
        let mut avoid = BTreeSet::new();
        for t in premises {
            avoid.extend(t.free_names());
        }
        for p in [&params.pre, &params.post, &params.other, &params.phi, &params.body]
            .into_iter()
            .flatten()
        {
            avoid.extend(p.free_names());
        }
        for t in params.terms.iter().chain(&params.forward).chain(&params.backward) {
            avoid.extend(free_names(t));
        }
        avoid.extend(params.binders.iter().map(|(n, _)| n.clone()));
        Fresh(avoid)
    }

    fn vars(&mut self, base: &str, types: &[Type]) -> Vec<Binder> {
        fresh_vars(base, types, &mut self.0)
    }
}

fn cat(parts: &[&[Binder]]) -> Vec<Binder> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

fn args(parts: &[&[Binder]]) -> Vec<Term> {
    var_terms(&cat(parts))
}

/// `λbinders. f args` for every component.
fn wrap(binders: &[Binder], fs: &[Term], call: &[Term]) -> Vec<Term> {
    apps(fs, call)
        .into_iter()
        .map(|t| normalize(&lams(binders, t)))
        .collect()
}

fn bar(c: &Term) -> Term {
    Term::ite(c.clone(), Term::numeral(1), Term::Zero)
}

fn require_qf_guard(rule: RuleId, phi: &Formula) -> Result<(), DhlError> {
    if !phi.is_quantifier_free() || !signature(phi).is_quantifier_free() {
        return Err(DhlError::NotQuantifierFree(format!(
            "{}: guard {}",
            rule.name(),
            formula_to_string(phi)
        )));
    }
    Ok(())
}

fn given_or_zero(given: &[Term], types: &[Type]) -> Vec<Term> {
    if given.is_empty() {
        zero_terms(types)
    } else {
        given.to_vec()
    }
}

fn discharge(
    rule: RuleId,
    kind: SideConditionKind,
    description: String,
    assume: bool,
    gen: &Generator,
    test: impl FnOnce(&Generator) -> Result<CheckReport, crate::check::CheckError>,
) -> Result<SideCondition, DhlError> {
    if assume {
        return Ok(SideCondition::new(kind, description, Status::Assumed));
    }
    let report = test(gen)?;
    if !report.passed() {
        return Err(DhlError::SideConditionViolated {
            rule: rule.name(),
            obligation: description,
            verdict: report.verdict(),
        });
    }
    let status = if report.method == crate::check::Method::Syntactic {
        Status::Syntactic
    } else {
        Status::PropertyTested(report)
    };
    Ok(SideCondition::new(kind, description, status))
}

fn freshness(rule: RuleId, binders: &[Binder], p: &Formula, which: &str) -> Result<SideCondition, DhlError> {
    let fv = p.free_names();
    let names: Vec<String> = binders.iter().map(|(n, _)| n.to_string()).collect();
    let description = format!("{} not free in {which} {}", names.join(" "), formula_to_string(p));
    if binders.iter().any(|(n, _)| fv.contains(n)) {
        return Err(DhlError::SideConditionViolated {
            rule: rule.name(),
            obligation: description,
            verdict: "variable occurs free".to_string(),
        });
    }
    Ok(SideCondition::new(SideConditionKind::Freshness, description, Status::Syntactic))
}

/// Applies one rule. Parameters read per rule:
///
/// * `ax-efq`: `post` = P, optional `forward`. `ax-top`: `pre`, optional
///   `backward`. `ax-id`: `pre`.
/// * `ax-universal`: `pre`, `post`. `rule-universal`: `pre`, `post` of the
///   conclusion.
/// * `or-r`, `or-r-prime`: `other` = R, optional `forward` = b. `and-l`:
///   `other`, optional `backward` = β.
/// * `exists-r`, `forall-l`: `binders`, `body`, `terms`. `exists-l`,
///   `forall-r`: `binders`. `subst-l`, `subst-r`: `terms`.
/// * `epsilon-r`, `epsilon-l`: optional `count` (default 1).
/// * `cons`: optional `pre`, `post`. `ext`: `forward`, `backward`.
/// * `ind`: `binders` = the induction variable. `while`: `relation`,
///   `binders`, `phi`. `n`: `body` = Q.
///
/// `assume` marks consequence, extensionality, axiom and descent conditions
/// as assumed instead of testing them.
pub fn apply_rule(
    rule: RuleId,
    premises: &[Triple],
    params: &Params,
    session: &mut Session,
) -> Result<Applied, DhlError> {
    use RuleId::*;
    arity(rule, premises)?;
    let mut fresh = Fresh::new(premises, params);
    let mut side = Vec::new();
    let conclusion = match rule {
        AxEfq => {
            let p = need(rule, &params.post, "post")?.clone();
            let w = signature(&p).witnesses;
            Triple::new(Formula::Bot, given_or_zero(&params.forward, &w), vec![], p)
        }
        AxTop => {
            let p = need(rule, &params.pre, "pre")?.clone();
            let s = signature(&p);
            let tys = seq_arrow(&s.witnesses, &s.counters);
            Triple::new(p, vec![], given_or_zero(&params.backward, &tys), Formula::Top)
        }
        AxId => {
            let p = need(rule, &params.pre, "pre")?.clone();
            let s = signature(&p);
            let xs = fresh.vars("x", &s.witnesses);
            let vs = fresh.vars("v", &s.counters);
            let fwd = var_terms(&xs).into_iter().map(|x| lams(&xs, x)).collect();
            let xv = cat(&[&xs, &vs]);
            let bwd = var_terms(&vs).into_iter().map(|v| lams(&xv, v)).collect();
            Triple::new(p.clone(), fwd, bwd, p)
        }
        AxUniversal => {
            let p = need(rule, &params.pre, "pre")?.clone();
            let q = need(rule, &params.post, "post")?.clone();
            if !signature(&p).is_existential() {
                return Err(DhlError::NotPurelyExistential(formula_to_string(&p)));
            }
            if !signature(&q).is_universal() {
                return Err(DhlError::NotPurelyUniversal(formula_to_string(&q)));
            }
            let t = Triple::new(p, vec![], vec![], q);
            side.push(universal_membership(rule, &t, params.assume, &session.gen)?);
            t
        }
        RuleUniversal => {
            let prem = &premises[0];
            let p = need(rule, &params.pre, "pre")?.clone();
            let q = need(rule, &params.post, "post")?.clone();
            for f in [&prem.pre, &p] {
                if !signature(f).is_existential() {
                    return Err(DhlError::NotPurelyExistential(formula_to_string(f)));
                }
            }
            for f in [&prem.post, &q] {
                if !signature(f).is_universal() {
                    return Err(DhlError::NotPurelyUniversal(formula_to_string(f)));
                }
            }
            let t = Triple::new(p, vec![], vec![], q);
            side.push(universal_membership(rule, &t, params.assume, &session.gen)?);
            t
        }
        PermAndR => {
            let t = &premises[0];
            let (q, r) = split2(rule, "postcondition", &t.post)?;
            let (sp, sq, sr) = (signature(&t.pre), signature(&q), signature(&r));
            let (a, b) = t.forward.split_at(sq.witnesses.len());
            let xs = fresh.vars("x", &sp.witnesses);
            let ws = fresh.vars("w", &sr.counters);
            let vs = fresh.vars("v", &sq.counters);
            let bwd = wrap(&cat(&[&xs, &ws, &vs]), &t.backward, &args(&[&xs, &vs, &ws]));
            Triple::new(t.pre.clone(), [b, a].concat(), bwd, Formula::and(r, q))
        }
        PermAndL => {
            let t = &premises[0];
            let (p, q) = split2(rule, "precondition", &t.pre)?;
            swap_left(rule, t, &p, &q, Formula::and(q.clone(), p.clone()), &mut fresh)
        }
        PermOrR => {
            let t = &premises[0];
            let (c, q, r) = split_or_t(rule, "postcondition", &t.post)?;
            let (sp, sq, sr) = (signature(&t.pre), signature(&q), signature(&r));
            let (a, b) = t.forward.split_at(sq.witnesses.len());
            let xs = fresh.vars("x", &sp.witnesses);
            let ws = fresh.vars("w", &sr.counters);
            let vs = fresh.vars("v", &sq.counters);
            let bwd = wrap(&cat(&[&xs, &ws, &vs]), &t.backward, &args(&[&xs, &vs, &ws]));
            Triple::new(t.pre.clone(), [b, a].concat(), bwd, Formula::or_t(bar(&c), r, q))
        }
        PermOrL => {
            let t = &premises[0];
            let (c, p, q) = split_or_t(rule, "precondition", &t.pre)?;
            swap_left(rule, t, &p, &q, Formula::or_t(bar(&c), q.clone(), p.clone()), &mut fresh)
        }
        OrR | OrRPrime => {
            let t = &premises[0];
            let r = need(rule, &params.other, "other")?.clone();
            let (sp, sq, sr) = (signature(&t.pre), signature(&t.post), signature(&r));
            let b = given_or_zero(&params.forward, &seq_arrow(&sp.witnesses, &sr.witnesses));
            let xs = fresh.vars("x", &sp.witnesses);
            let vs = fresh.vars("v", &sq.counters);
            let ws = fresh.vars("w", &sr.counters);
            let bwd = wrap(&cat(&[&xs, &vs, &ws]), &t.backward, &args(&[&xs, &vs]));
            if rule == OrR {
                let fwd = [t.forward.clone(), b].concat();
                Triple::new(t.pre.clone(), fwd, bwd, Formula::or_t(Term::Zero, t.post.clone(), r))
            } else {
                let tag = normalize(&lams(&xs, Term::Zero));
                let fwd = [vec![tag], t.forward.clone(), b].concat();
                Triple::new(t.pre.clone(), fwd, bwd, Formula::or(t.post.clone(), r))
            }
        }
        AndL => {
            let t = &premises[0];
            let r = need(rule, &params.other, "other")?.clone();
            let (sp, sq, sr) = (signature(&t.pre), signature(&t.post), signature(&r));
            let beta_ty = seq_arrow(&[sp.witnesses.clone(), sr.witnesses.clone(), sq.counters.clone()].concat(), &sr.counters);
            let beta = given_or_zero(&params.backward, &beta_ty);
            let xs = fresh.vars("x", &sp.witnesses);
            let ys = fresh.vars("y", &sr.witnesses);
            let vs = fresh.vars("v", &sq.counters);
            let fwd = wrap(&cat(&[&xs, &ys]), &t.forward, &args(&[&xs]));
            let mut bwd = wrap(&cat(&[&xs, &ys, &vs]), &t.backward, &args(&[&xs, &vs]));
            bwd.extend(beta);
            Triple::new(Formula::and(t.pre.clone(), r), fwd, bwd, t.post.clone())
        }
        AndR => {
            let t = &premises[0];
            let (q, r) = split2(rule, "postcondition", &t.post)?;
            let (sp, sq, sr) = (signature(&t.pre), signature(&q), signature(&r));
            let xs = fresh.vars("x", &sp.witnesses);
            let vs = fresh.vars("v", &sq.counters);
            let mut call = args(&[&xs, &vs]);
            call.extend(zero_terms(&sr.counters));
            let bwd = wrap(&cat(&[&xs, &vs]), &t.backward, &call);
            Triple::new(t.pre.clone(), t.forward[..sq.witnesses.len()].to_vec(), bwd, q)
        }
        OrL => {
            let t = &premises[0];
            let (tag, p, r) = split_or_t(rule, "precondition", &t.pre)?;
            if normalize(&tag) != Term::Zero {
                return Err(shape(rule, "precondition", "a disjunction tagged 0", &t.pre));
            }
            let (sp, sq, sr) = (signature(&p), signature(&t.post), signature(&r));
            let xs = fresh.vars("x", &sp.witnesses);
            let vs = fresh.vars("v", &sq.counters);
            let mut fcall = args(&[&xs]);
            fcall.extend(zero_terms(&sr.witnesses));
            let fwd = wrap(&xs, &t.forward, &fcall);
            let mut bcall = args(&[&xs]);
            bcall.extend(zero_terms(&sr.witnesses));
            bcall.extend(var_terms(&vs));
            let alpha = &t.backward[..sp.counters.len()];
            let bwd = wrap(&cat(&[&xs, &vs]), alpha, &bcall);
            Triple::new(p, fwd, bwd, t.post.clone())
        }
        CondL => {
            let (t1, t2) = (&premises[0], &premises[1]);
            let (p, phi) = split2(rule, "first precondition", &t1.pre)?;
            let (q, notphi) = split2(rule, "second precondition", &t2.pre)?;
            require_qf_guard(rule, &phi)?;
            expect_same(rule, "second guard", &Formula::not(phi.clone()), &notphi)?;
            expect_same(rule, "second postcondition", &t1.post, &t2.post)?;
            let tag = chi(&phi)?;
            cond_left(rule, t1, t2, &p, &q, Formula::or_t(tag.clone(), p.clone(), q.clone()), Some(tag), &mut fresh)
        }
        CondLPrime => {
            let (t1, t2) = (&premises[0], &premises[1]);
            expect_same(rule, "second postcondition", &t1.post, &t2.post)?;
            let (p, q) = (t1.pre.clone(), t2.pre.clone());
            cond_left(rule, t1, t2, &p, &q, Formula::or(p.clone(), q.clone()), None, &mut fresh)
        }
        CondR => {
            let (t1, t2) = (&premises[0], &premises[1]);
            expect_same(rule, "second precondition", &t1.pre, &t2.pre)?;
            let (sp, sq, sr) = (signature(&t1.pre), signature(&t1.post), signature(&t2.post));
            let xs = fresh.vars("x", &sp.witnesses);
            let vs = fresh.vars("v", &sq.counters);
            let ws = fresh.vars("w", &sr.counters);
            let alpha_xv = apps(&t1.backward, &args(&[&xs, &vs]));
            let beta_xw = apps(&t2.backward, &args(&[&xs, &ws]));
            let test = chi(&matrix(&t1.pre, &var_terms(&xs), &alpha_xv)?)?;
            let binders = cat(&[&xs, &vs, &ws]);
            let bwd = alpha_xv
                .iter()
                .zip(&beta_xw)
                .map(|(a, b)| normalize(&lams(&binders, Term::ite(test.clone(), b.clone(), a.clone()))))
                .collect();
            let fwd = [t1.forward.clone(), t2.forward.clone()].concat();
            Triple::new(t1.pre.clone(), fwd, bwd, Formula::and(t1.post.clone(), t2.post.clone()))
        }
        Imp => {
            let t = &premises[0];
            let (q, r) = split_imp(rule, "postcondition", &t.post)?;
            let n = signature(&r).witnesses.len();
            let (a, b) = t.forward.split_at(n);
            let bwd = [t.backward.clone(), b.to_vec()].concat();
            Triple::new(Formula::and(t.pre.clone(), q), a.to_vec(), bwd, r)
        }
        Exp => {
            let t = &premises[0];
            let (p, q) = split2(rule, "precondition", &t.pre)?;
            let n = signature(&p).counters.len();
            let (alpha, beta) = t.backward.split_at(n);
            let fwd = [t.forward.clone(), beta.to_vec()].concat();
            Triple::new(p, fwd, alpha.to_vec(), Formula::imp(q, t.post.clone()))
        }
        Comp => {
            let (t1, t2) = (&premises[0], &premises[1]);
            expect_same(rule, "second precondition", &t1.post, &t2.pre)?;
            let domain = signature(&t1.pre).witnesses;
            let dual = signature(&t2.post).counters;
            let fwd = compose_forward(&t1.forward, &t2.forward, &domain);
            let bwd = compose_backward(&t1.forward, &t1.backward, &t2.backward, &domain, &dual);
            Triple::new(
                t1.pre.clone(),
                fwd.iter().map(normalize).collect(),
                bwd.iter().map(normalize).collect(),
                t2.post.clone(),
            )
        }
        ExistsR => {
            let t = &premises[0];
            let body = need(rule, &params.body, "body")?;
            check_terms_fit(rule, &params.binders, &params.terms)?;
            expect_same(rule, "postcondition", &instantiate(body, &params.binders, &params.terms), &t.post)?;
            let xs = fresh.vars("x", &signature(&t.pre).witnesses);
            let consts: Vec<Term> = params.terms.iter().map(|c| normalize(&lams(&xs, c.clone()))).collect();
            let fwd = [consts, t.forward.clone()].concat();
            Triple::new(
                t.pre.clone(),
                fwd,
                t.backward.clone(),
                Formula::exists_many(&params.binders, body.clone()),
            )
        }
        ForallL => {
            let t = &premises[0];
            let body = need(rule, &params.body, "body")?;
            check_terms_fit(rule, &params.binders, &params.terms)?;
            expect_same(rule, "precondition", &instantiate(body, &params.binders, &params.terms), &t.pre)?;
            let sp = signature(&t.pre);
            let sq = signature(&t.post);
            let xtys: Vec<Type> = params.binders.iter().map(|(_, t)| t.clone()).collect();
            let fs = fresh.vars("f", &seq_arrow(&xtys, &sp.witnesses));
            let vs = fresh.vars("v", &sq.counters);
            let ft = apps(&var_terms(&fs), &params.terms);
            let fwd = wrap(&fs, &t.forward, &ft);
            let fv = cat(&[&fs, &vs]);
            let mut bwd: Vec<Term> = params.terms.iter().map(|c| normalize(&lams(&fv, c.clone()))).collect();
            let mut call = ft;
            call.extend(var_terms(&vs));
            bwd.extend(wrap(&fv, &t.backward, &call));
            Triple::new(Formula::forall_many(&params.binders, body.clone()), fwd, bwd, t.post.clone())
        }
        ExistsL => {
            let t = &premises[0];
            if params.binders.is_empty() {
                return Err(DhlError::MissingParameter { rule: rule.name(), param: "binders" });
            }
            side.push(freshness(rule, &params.binders, &t.post, "postcondition")?);
            let fwd = t.forward.iter().map(|a| lams(&params.binders, a.clone())).collect();
            let bwd = t.backward.iter().map(|a| lams(&params.binders, a.clone())).collect();
            Triple::new(Formula::exists_many(&params.binders, t.pre.clone()), fwd, bwd, t.post.clone())
        }
        ForallR => {
            let t = &premises[0];
            if params.binders.is_empty() {
                return Err(DhlError::MissingParameter { rule: rule.name(), param: "binders" });
            }
            side.push(freshness(rule, &params.binders, &t.pre, "precondition")?);
            let ys = fresh.vars("y", &signature(&t.pre).witnesses);
            let yx = cat(&[&ys, &params.binders]);
            let call = var_terms(&ys);
            let fwd = wrap(&yx, &t.forward, &call);
            let bwd = wrap(&yx, &t.backward, &call);
            Triple::new(t.pre.clone(), fwd, bwd, Formula::forall_many(&params.binders, t.post.clone()))
        }
        SubstL => {
            let t = &premises[0];
            let n = params.terms.len();
            let (bs, body) = open_quantifiers(rule, "precondition", &t.pre, n, true, &[])?;
            check_terms_fit(rule, &bs, &params.terms)?;
            let fwd = apps(&t.forward, &params.terms).iter().map(normalize).collect();
            let bwd = apps(&t.backward, &params.terms).iter().map(normalize).collect();
            Triple::new(instantiate(&body, &bs, &params.terms), fwd, bwd, t.post.clone())
        }
        SubstR => {
            let t = &premises[0];
            let n = params.terms.len();
            let (bs, body) = open_quantifiers(rule, "postcondition", &t.post, n, false, &[])?;
            check_terms_fit(rule, &bs, &params.terms)?;
            let (sp, sq) = (signature(&t.pre), signature(&body));
            let ys = fresh.vars("y", &sp.witnesses);
            let vs = fresh.vars("v", &sq.counters);
            let mut fcall = var_terms(&ys);
            fcall.extend(params.terms.iter().cloned());
            let fwd = wrap(&ys, &t.forward, &fcall);
            let mut bcall = fcall.clone();
            bcall.extend(var_terms(&vs));
            let bwd = wrap(&cat(&[&ys, &vs]), &t.backward, &bcall);
            Triple::new(t.pre.clone(), fwd, bwd, instantiate(&body, &bs, &params.terms))
        }
        EpsilonR => {
            let t = &premises[0];
            if !signature(&t.pre).is_universal() {
                return Err(DhlError::NotPurelyUniversal(formula_to_string(&t.pre)));
            }
            let n = params.count.unwrap_or(1);
            let (bs, body) = open_quantifiers(rule, "postcondition", &t.post, n, true, &[])?;
            let (a, b) = t.forward.split_at(n);
            let eps = session.epsilon(a)?;
            Triple::new(t.pre.clone(), b.to_vec(), t.backward.clone(), instantiate(&body, &bs, &eps))
        }
        EpsilonL => {
            let t = &premises[0];
            let n = params.count.unwrap_or(1);
            let (bs, body) = open_quantifiers(rule, "precondition", &t.pre, n, false, &[])?;
            if !signature(&body).is_universal() {
                return Err(DhlError::NotPurelyUniversal(formula_to_string(&body)));
            }
            if !signature(&t.post).is_quantifier_free() {
                return Err(DhlError::NotQuantifierFree(formula_to_string(&t.post)));
            }
            let (alpha, beta) = t.backward.split_at(n);
            let eps = session.epsilon(alpha)?;
            Triple::new(instantiate(&body, &bs, &eps), vec![], beta.to_vec(), t.post.clone())
        }
        Cons => {
            let t = &premises[0];
            let p2 = params.pre.clone().unwrap_or_else(|| t.pre.clone());
            let q2 = params.post.clone().unwrap_or_else(|| t.post.clone());
            for (from, to) in [(&p2, &t.pre), (&t.post, &q2)] {
                let description = format!("{} ->D {}", formula_to_string(from), formula_to_string(to));
                side.push(discharge(
                    rule,
                    SideConditionKind::DImplies,
                    description,
                    params.assume,
                    &session.gen,
                    |g| d_implies(g, from, to),
                )?);
            }
            Triple::new(p2, t.forward.clone(), t.backward.clone(), q2)
        }
        Ext => {
            let t = &premises[0];
            let lhs = [t.forward.clone(), t.backward.clone()].concat();
            let rhs = [params.forward.clone(), params.backward.clone()].concat();
            let description = format!("{} = {}", super::show_terms(&lhs), super::show_terms(&rhs));
            let out = Triple::new(t.pre.clone(), params.forward.clone(), params.backward.clone(), t.post.clone());
            out.check()?;
            side.push(discharge(
                rule,
                SideConditionKind::TermEquality,
                description,
                params.assume,
                &session.gen,
                |g| term_equality(g, &lhs, &rhs),
            )?);
            out
        }
        Ind => {
            let t = &premises[0];
            let x = match params.binders.as_slice() {
                [(x, Type::Nat)] => x.clone(),
                _ => {
                    return Err(DhlError::MissingParameter {
                        rule: rule.name(),
                        param: "binders (one nat variable)",
                    })
                }
            };
            let xv = Term::Var(x.clone(), Type::Nat);
            expect_same(rule, "postcondition", &t.pre.substitute_one(&x, &Term::suc(xv)), &t.post)?;
            let s = signature(&t.pre);
            let xb = [(x.clone(), Type::Nat)];
            let step: Vec<Term> = t.forward.iter().map(|a| lams(&xb, a.clone())).collect();
            let back: Vec<Term> = t.backward.iter().map(|a| lams(&xb, a.clone())).collect();
            let fwd = make_forward_recursor(&step, &s.witnesses).map_err(|e| DhlError::IllTyped(e.to_string()))?;
            let bwd = make_backward_recursor(&step, &back, &s.witnesses, &s.counters)
                .map_err(|e| DhlError::IllTyped(e.to_string()))?;
            Triple::new(
                t.pre.substitute_one(&x, &Term::Zero),
                fwd.iter().map(normalize).collect(),
                bwd.iter().map(normalize).collect(),
                Formula::forall(&x, Type::Nat, t.pre.clone()),
            )
        }
        While => {
            let t = &premises[0];
            let rel = need(rule, &params.relation, "relation")?.clone();
            let phi = need(rule, &params.phi, "phi")?.clone();
            require_qf_guard(rule, &phi)?;
            let xs = params.binders.clone();
            let carrier: Vec<Type> = xs.iter().map(|(_, t)| t.clone()).collect();
            if carrier != rel.carrier {
                return Err(DhlError::ShapeMismatch {
                    rule: rule.name(),
                    what: "binders",
                    expected: format!("the carrier of {}", rel.name),
                    found: crate::kernel::types::display_seq(&carrier),
                });
            }
            let n = xs.len();
            let (_, post_body) = open_quantifiers(rule, "postcondition", &t.post, n, true, &xs)?;
            let (_, pre_body) = open_quantifiers(rule, "precondition", &t.pre, n, true, &xs)?;
            let (p, phi2) = split2(rule, "precondition body", &pre_body)?;
            expect_same(rule, "precondition body", &post_body, &p)?;
            expect_same(rule, "precondition guard", &phi, &phi2)?;
            let sp = signature(&p);
            if !sp.is_universal() {
                return Err(DhlError::NotPurelyUniversal(formula_to_string(&p)));
            }
            let guard = normalize(&lams(&xs, chi(&phi)?));
            let description = format!(
                "forall {} ({} -> step below under {})",
                xs.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>().join(" "),
                formula_to_string(&phi),
                rel.name
            );
            let step = t.forward.clone();
            side.push(discharge(
                rule,
                SideConditionKind::Descent,
                description,
                params.assume,
                &session.gen,
                |g| check_descent(g, &rel, &guard, &step),
            )?);
            let fwd = make_while_forward(&rel, &guard, &step).map_err(|e| DhlError::IllTyped(e.to_string()))?;
            let bwd = make_while_backward(&rel, &guard, &step, &t.backward, &sp.counters)
                .map_err(|e| DhlError::IllTyped(e.to_string()))?;
            Triple::new(
                Formula::exists_many(&xs, p.clone()),
                fwd,
                bwd,
                Formula::exists_many(&xs, Formula::and(p, Formula::not(phi))),
            )
        }
        POrLPrime => {
            let t = &premises[0];
            let (p, q) = match &t.pre {
                Formula::Or(a, b) => ((**a).clone(), (**b).clone()),
                other => return Err(shape(rule, "precondition", "a disjunction", other)),
            };
            let (sp, sq, sr) = (signature(&p), signature(&q), signature(&t.post));
            let c = fresh.vars("c", &[Type::Nat]);
            let xs = fresh.vars("x", &sp.witnesses);
            let ys = fresh.vars("y", &sq.witnesses);
            let vs = fresh.vars("v", &sr.counters);
            let cbar = bar(&var_terms(&c)[0]);
            let mut call = vec![cbar];
            call.extend(args(&[&xs, &ys]));
            let fwd = wrap(&cat(&[&c, &ys, &xs]), &t.forward, &call);
            call.extend(var_terms(&vs));
            let binders = cat(&[&c, &ys, &xs, &vs]);
            let (alpha, beta) = t.backward.split_at(sp.counters.len());
            let bwd = [wrap(&binders, beta, &call), wrap(&binders, alpha, &call)].concat();
            Triple::new(Formula::or(q, p), fwd, bwd, t.post.clone())
        }
        CP => {
            let t = &premises[0];
            let q = double_negated(rule, &t.post)?;
            let (sp, sq) = (signature(&t.pre), signature(&q));
            let gs = fresh.vars("g", &seq_arrow(&sq.witnesses, &sq.counters));
            let xs = fresh.vars("x", &sp.witnesses);
            let binders = cat(&[&gs, &xs]);
            let call = args(&[&xs, &gs]);
            let fwd = wrap(&binders, &t.backward, &call);
            let bwd = wrap(&binders, &t.forward, &call);
            Triple::new(Formula::not(q), fwd, bwd, Formula::not(t.pre.clone()))
        }
        N => {
            let t = &premises[0];
            let q = need(rule, &params.body, "body")?;
            let nn = Formula::not(Formula::not(q.clone()));
            let mut avoid = fresh.0.clone();
            avoid.extend(q.free_names());
            let sq = signature(q);
            let gs = fresh_vars("g", &seq_arrow(&sq.witnesses, &sq.counters), &mut avoid);
            let us = fresh_vars("u", &sq.witnesses, &mut avoid);
            let m = matrix(q, &var_terms(&us), &apps(&var_terms(&gs), &var_terms(&us)))?.map_terms(&normalize);
            let ga = Formula::forall_many(&gs, Formula::exists_many(&us, m));
            let post = if same_formula(&t.post, &nn) {
                ga
            } else if same_formula(&t.post, &ga) {
                nn
            } else {
                return Err(shape(
                    rule,
                    "postcondition",
                    &format!("{} or {}", formula_to_string(&nn), formula_to_string(&ga)),
                    &t.post,
                ));
            };
            Triple::new(t.pre.clone(), t.forward.clone(), t.backward.clone(), post)
        }
        CompNeg => {
            let (t1, t2) = (&premises[0], &premises[1]);
            let q = double_negated(rule, &t1.post)?;
            expect_same(rule, "second precondition", &q, &t2.pre)?;
            if !signature(&t2.post).is_existential() {
                return Err(DhlError::NotPurelyExistential(formula_to_string(&t2.post)));
            }
            let xs = fresh.vars("x", &signature(&t1.pre).witnesses);
            let mut call = var_terms(&xs);
            call.extend(t2.backward.iter().cloned());
            let u = apps(&t1.forward, &call);
            let fwd = wrap(&xs, &t2.forward, &u);
            let bwd = wrap(&xs, &t1.backward, &call);
            Triple::new(t1.pre.clone(), fwd, bwd, t2.post.clone())
        }
    };
    conclusion.check().map_err(|e| match e {
        DhlError::IllTyped(m) => DhlError::IllTyped(format!("{}: {m}", rule.name())),
        e => e,
    })?;
    Ok(Applied {
        conclusion,
        side_conditions: side,
    })
}

fn universal_membership(rule: RuleId, t: &Triple, assume: bool, gen: &Generator) -> Result<SideCondition, DhlError> {
    let description = format!(
        "{} -> {} is a universal axiom",
        formula_to_string(&t.pre),
        formula_to_string(&t.post)
    );
    if same_formula(&t.pre, &t.post) {
        return Ok(SideCondition::new(
            SideConditionKind::UniversalAxiom,
            description,
            Status::Syntactic,
        ));
    }
    let phi = t.obligation()?;
    discharge(rule, SideConditionKind::UniversalAxiom, description, assume, gen, |g| {
        check_formula(g, "axiom", &phi)
    })
}

/// Shared by `perm-and-l` and `perm-or-l`: swap the two blocks of a binary
/// precondition.
fn swap_left(rule: RuleId, t: &Triple, p: &Formula, q: &Formula, pre: Formula, fresh: &mut Fresh) -> Triple {
    let _ = rule;
    let (sp, sq, sr) = (signature(p), signature(q), signature(&t.post));
    let ys = fresh.vars("y", &sq.witnesses);
    let xs = fresh.vars("x", &sp.witnesses);
    let vs = fresh.vars("v", &sr.counters);
    let fwd = wrap(&cat(&[&ys, &xs]), &t.forward, &args(&[&xs, &ys]));
    let (alpha, beta) = t.backward.split_at(sp.counters.len());
    let binders = cat(&[&ys, &xs, &vs]);
    let call = args(&[&xs, &ys, &vs]);
    let bwd = [wrap(&binders, beta, &call), wrap(&binders, alpha, &call)].concat();
    Triple::new(pre, fwd, bwd, t.post.clone())
}

/// Shared by `cond-l` (tag `χ_φ`) and `cond-l-prime` (tag read from the
/// disjunction's own witness).
#[allow(clippy::too_many_arguments)]
fn cond_left(
    rule: RuleId,
    t1: &Triple,
    t2: &Triple,
    p: &Formula,
    q: &Formula,
    pre: Formula,
    tag: Option<Term>,
    fresh: &mut Fresh,
) -> Triple {
    let _ = rule;
    let (sp, sq, sr) = (signature(p), signature(q), signature(&t1.post));
    let c = if tag.is_none() { fresh.vars("c", &[Type::Nat]) } else { vec![] };
    let xs = fresh.vars("x", &sp.witnesses);
    let ys = fresh.vars("y", &sq.witnesses);
    let vs = fresh.vars("v", &sr.counters);
    let test = tag.unwrap_or_else(|| var_terms(&c)[0].clone());
    let ax = apps(&t1.forward, &var_terms(&xs));
    let by = apps(&t2.forward, &var_terms(&ys));
    let head = cat(&[&c, &xs, &ys]);
    let fwd = ax
        .into_iter()
        .zip(by)
        .map(|(a, b)| normalize(&lams(&head, Term::ite(test.clone(), a, b))))
        .collect();
    let binders = cat(&[&c, &xs, &ys, &vs]);
    let bwd = [
        wrap(&binders, &t1.backward, &args(&[&xs, &vs])),
        wrap(&binders, &t2.backward, &args(&[&ys, &vs])),
    ]
    .concat();
    Triple::new(pre, fwd, bwd, t1.post.clone())
}

/// `x ≺ y` as a formula for a relation's decider.
pub fn below(rel: &Relation, lower: &[Term], upper: &[Term]) -> Formula {
    Formula::eq(
        Term::apps(rel.decider.clone(), lower.iter().chain(upper).cloned()),
        Term::Zero,
    )
}

/// `x < y` on nat, spelled with the builtin cut-off subtraction.
pub fn nat_below(x: Term, y: Term) -> Formula {
    Formula::eq(monus(Term::suc(x), y), Term::Zero)
}
