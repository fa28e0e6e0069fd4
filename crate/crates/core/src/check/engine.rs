use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::generate::Generator;
use super::{CheckError, CheckReport, Counterexample, Method};
use crate::kernel::builtins::monus;
use crate::kernel::eval::{Compiled, EvalError, Machine, Value};
use crate::kernel::normalize::normalize;
use crate::kernel::seq::{apps, fresh_var, fresh_vars, var_terms};
use crate::kernel::subst::{alpha_eq, free_names, free_vars, substitute_consts};
use crate::kernel::typing::type_of;
use crate::kernel::types::Type;
use crate::kernel::{Constant, Name, Relation, Term};
use crate::logic::syntax::formula_to_string;
use crate::logic::{chi, matrix, signature, Formula};

fn stream_seed(seed: u64, label: &str) -> u64 {
    let digest = Sha256::digest(label.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(head)
}

/// Runs `test` on every assignment of the variables (or a seeded sample when
/// there are too many). `test` returns a failure description or `None`.
pub fn enumerate(
    gen: &Generator,
    label: &str,
    obligation: String,
    vars: &[(Name, Type)],
    mut test: impl FnMut(&mut Machine, &[Value]) -> Result<Option<String>, EvalError>,
) -> Result<CheckReport, CheckError> {
    gen.budget.validate()?;
    let pools = vars
        .iter()
        .map(|(_, t)| gen.candidates(t))
        .collect::<Result<Vec<_>, _>>()?;
    let total = pools
        .iter()
        .try_fold(1u64, |acc, p| acc.checked_mul(p.len() as u64));
    let exhaustive = matches!(total, Some(n) if n <= gen.budget.max_instances);
    let count = if exhaustive { total.unwrap() } else { gen.budget.max_instances };
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(gen.budget.seed, &obligation));
    let mut idx = vec![0usize; pools.len()];
    let mut values = Vec::with_capacity(pools.len());
    for k in 0..count {
        if exhaustive {
            let mut rest = k;
            for (i, p) in pools.iter().enumerate().rev() {
                idx[i] = (rest % p.len() as u64) as usize;
                rest /= p.len() as u64;
            }
        } else {
            for (i, p) in pools.iter().enumerate() {
                idx[i] = rng.gen_range(0..p.len());
            }
        }
        values.clear();
        values.extend(idx.iter().zip(&pools).map(|(&i, p)| p[i].value.clone()));
        let mut machine = Machine::new(gen.budget.fuel);
        let failure = match test(&mut machine, &values) {
            Ok(f) => f,
            Err(e) => Some(e.to_string()),
        };
        if let Some(outcome) = failure {
            let assignment = vars
                .iter()
                .zip(idx.iter().zip(&pools))
                .map(|((n, _), (&i, p))| (n.to_string(), p[i].show()))
                .collect();
            return Ok(CheckReport {
                label: label.to_string(),
                obligation,
                method: if exhaustive { Method::Exhaustive } else { Method::Sampled },
                instances: k + 1,
                counterexample: Some(Counterexample {
                    assignment,
                    outcome,
                }),
            });
        }
    }
    Ok(CheckReport {
        label: label.to_string(),
        obligation,
        method: if exhaustive { Method::Exhaustive } else { Method::Sampled },
        instances: count,
        counterexample: None,
    })
}

/// Uninterpreted constants occurring in the formula.
fn uninterpreted(phi: &Formula) -> BTreeMap<Name, Arc<Constant>> {
    fn go(t: &Term, out: &mut BTreeMap<Name, Arc<Constant>>) {
        match t {
            Term::Const(c) if c.implementation().is_none() => {
                out.insert(c.name.clone(), c.clone());
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
            _ => {}
        }
    }
    let mut out = BTreeMap::new();
    collect_terms(phi, &mut |t| go(t, &mut out));
    out
}

fn collect_terms(phi: &Formula, f: &mut dyn FnMut(&Term)) {
    match phi {
        Formula::Eq(a, b) => {
            f(a);
            f(b);
        }
        Formula::Top | Formula::Bot => {}
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_terms(a, f);
            collect_terms(b, f);
        }
        Formula::OrT(t, a, b) => {
            f(t);
            collect_terms(a, f);
            collect_terms(b, f);
        }
        Formula::Forall(_, _, b) | Formula::Exists(_, _, b) => collect_terms(b, f),
    }
}

/// Tests a formula whose free variables (and uninterpreted constants) are
/// read universally. Leading universal quantifiers are stripped first.
pub fn check_formula(gen: &Generator, label: &str, phi: &Formula) -> Result<CheckReport, CheckError> {
    let mut body = phi.clone();
    while let Formula::Forall(_, _, b) = &body {
        body = (**b).clone();
    }
    let consts = uninterpreted(&body);
    let mut avoid: BTreeSet<Name> = body.free_names();
    let mut rename = BTreeMap::new();
    for (n, c) in &consts {
        let (fresh, _) = fresh_var(n, &c.ty, &mut avoid);
        rename.insert(n.clone(), Term::Var(fresh, c.ty.clone()));
    }
    let opened = if rename.is_empty() {
        body.clone()
    } else {
        body.map_terms(&|t| substitute_consts(t, &rename))
    };
    let chi_term = chi(&opened)?;
    let vars: Vec<(Name, Type)> = opened.free_vars().into_iter().collect();
    let names: Vec<Name> = vars.iter().map(|(n, _)| n.clone()).collect();
    let code = Compiled::new(&chi_term, &names).map_err(|e| CheckError::Compile(e.to_string()))?;
    enumerate(gen, label, formula_to_string(phi), &vars, |m, vals| {
        let v = code.run(m, vals)?;
        match v.nat() {
            Some(0) => Ok(None),
            Some(n) => Ok(Some(format!("chi = {n}"))),
            None => Ok(Some(format!("chi is not a numeral: {v:?}"))),
        }
    })
}

fn syntactic(label: &str, obligation: String) -> CheckReport {
    CheckReport {
        label: label.to_string(),
        obligation,
        method: Method::Syntactic,
        instances: 0,
        counterexample: None,
    }
}

/// `P' →_D P`: equal signatures and `∀x,v(|P'|_x^v → |P|_x^v)`. Identical
/// matrices (which covers the AC, IP and Markov reshufflings) pass
/// syntactically.
pub fn d_implies(gen: &Generator, p_prime: &Formula, p: &Formula) -> Result<CheckReport, CheckError> {
    let (s1, s2) = (signature(p_prime), signature(p));
    if s1 != s2 {
        return Err(CheckError::SignatureMismatch(format!("{s1} versus {s2}")));
    }
    let mut avoid = p_prime.free_names();
    avoid.extend(p.free_names());
    let w = var_terms(&fresh_vars("x", &s1.witnesses, &mut avoid));
    let c = var_terms(&fresh_vars("v", &s1.counters, &mut avoid));
    let m1 = matrix(p_prime, &w, &c)?.map_terms(&normalize);
    let m2 = matrix(p, &w, &c)?.map_terms(&normalize);
    let label = format!(
        "{} ->D {}",
        formula_to_string(p_prime),
        formula_to_string(p)
    );
    if m1.alpha_eq(&m2) {
        return Ok(syntactic("d-implies", label));
    }
    let mut report = check_formula(gen, "d-implies", &Formula::imp(m1, m2))?;
    report.obligation = label;
    Ok(report)
}

/// `∀x(φ(x) → a x ≺ x)`, plus strict decrease of the relation's measure.
pub fn check_descent(
    gen: &Generator,
    relation: &Relation,
    guard: &Term,
    step: &[Term],
) -> Result<CheckReport, CheckError> {
    let carrier = &relation.carrier;
    let gty = type_of(guard).map_err(|e| CheckError::TypeMismatch(e.to_string()))?;
    if gty != Type::arrows(carrier, Type::Nat) || step.len() != carrier.len() {
        return Err(CheckError::TypeMismatch(format!(
            "guard of type {gty} or {} step components do not fit carrier of {}",
            step.len(),
            relation.name
        )));
    }
    let mut avoid = free_names(guard);
    step.iter().for_each(|s| avoid.extend(free_names(s)));
    let xs = var_terms(&fresh_vars("x", carrier, &mut avoid));
    let ax = apps(step, &xs);
    let below = Term::apps(relation.decider.clone(), ax.iter().chain(&xs).cloned());
    let mut concl = Formula::eq(below, Term::Zero);
    if let Some(m) = &relation.measure {
        let before = Term::apps(m.clone(), xs.iter().cloned());
        let after = Term::apps(m.clone(), ax.iter().cloned());
        concl = Formula::and(concl, Formula::eq(monus(Term::suc(after), before), Term::Zero));
    }
    let phi = Formula::imp(
        Formula::eq(Term::apps(guard.clone(), xs.iter().cloned()), Term::Zero),
        concl,
    );
    check_formula(gen, "descent", &phi)
}

/// Consistency of a relation with its measure: `y ≺ x → m y < m x`.
pub fn check_relation(gen: &Generator, relation: &Relation) -> Result<CheckReport, CheckError> {
    let Some(m) = &relation.measure else {
        return Ok(syntactic("relation", format!("{} has no measure", relation.name)));
    };
    let mut avoid = BTreeSet::new();
    let ys = var_terms(&fresh_vars("y", &relation.carrier, &mut avoid));
    let xs = var_terms(&fresh_vars("x", &relation.carrier, &mut avoid));
    let below = Term::apps(relation.decider.clone(), ys.iter().chain(&xs).cloned());
    let phi = Formula::imp(
        Formula::eq(below, Term::Zero),
        Formula::eq(
            monus(
                Term::suc(Term::apps(m.clone(), ys.iter().cloned())),
                Term::apps(m.clone(), xs.iter().cloned()),
            ),
            Term::Zero,
        ),
    );
    check_formula(gen, "relation", &phi)
}

/// Extensional equality of two term sequences: normal forms first, then
/// pointwise on generated arguments and free variables.
pub fn term_equality(gen: &Generator, a: &[Term], b: &[Term]) -> Result<CheckReport, CheckError> {
    let label = format!(
        "{} = {}",
        crate::kernel::syntax::seq_to_string(a),
        crate::kernel::syntax::seq_to_string(b)
    );
    if a.len() != b.len() {
        return Err(CheckError::TypeMismatch(format!(
            "{} versus {} components",
            a.len(),
            b.len()
        )));
    }
    if a.iter().zip(b).all(|(x, y)| alpha_eq(&normalize(x), &normalize(y))) {
        return Ok(syntactic("ext", label));
    }
    let mut fv = BTreeMap::new();
    let mut avoid = BTreeSet::new();
    let mut comps = Vec::new();
    for (x, y) in a.iter().zip(b) {
        let tx = type_of(x).map_err(|e| CheckError::TypeMismatch(e.to_string()))?;
        let ty = type_of(y).map_err(|e| CheckError::TypeMismatch(e.to_string()))?;
        if tx != ty {
            return Err(CheckError::TypeMismatch(format!("{tx} versus {ty}")));
        }
        for (n, t) in free_vars(x)
            .into_iter()
            .chain(free_vars(y))
        {
            avoid.insert(n.clone());
            fv.insert(n, t);
        }
        comps.push((x.clone(), y.clone(), tx));
    }
    let mut vars: Vec<(Name, Type)> = fv.into_iter().collect();
    let names: Vec<Name> = vars.iter().map(|(n, _)| n.clone()).collect();
    let mut compiled = Vec::new();
    let mut arg_slots = Vec::new();
    for (x, y, t) in &comps {
        let args: Vec<Type> = t.uncurry().0.into_iter().cloned().collect();
        let binders = fresh_vars("e", &args, &mut avoid);
        let start = vars.len();
        vars.extend(binders.iter().cloned());
        arg_slots.push((start, binders.len()));
        let cx = Compiled::new(x, &names).map_err(|e| CheckError::Compile(e.to_string()))?;
        let cy = Compiled::new(y, &names).map_err(|e| CheckError::Compile(e.to_string()))?;
        compiled.push((cx, cy));
    }
    let n_free = names.len();
    enumerate(gen, "ext", label, &vars, |m, vals| {
        for ((cx, cy), (start, len)) in compiled.iter().zip(&arg_slots) {
            let free = &vals[..n_free];
            let args = &vals[*start..start + len];
            let fx = cx.run(m, free)?;
            let fy = cy.run(m, free)?;
            let rx = m.apply_all(&fx, args)?;
            let ry = m.apply_all(&fy, args)?;
            if !ground_eq(&rx, &ry) {
                return Ok(Some(format!("{rx:?} differs from {ry:?}")));
            }
        }
        Ok(None)
    })
}

fn ground_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Nat(x), Value::Nat(y)) => x == y,
        (Value::Opaque(x), Value::Opaque(y)) => x == y,
        _ => false,
    }
}
