//! Derived operators built from the recursors: the forward and backward while
//! loops, the backward recursor, and sequence composition.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::builtins::monus;
use super::seq::{apps, fresh_vars, lams, var_terms, Binder};
use super::subst::free_names;
use super::term::{Name, Relation, Term};
use super::typing::{type_of, TypeError};
use super::types::{seq_arrow, Type};

fn avoid_of(terms: &[&[Term]]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for group in terms {
        for t in group.iter() {
            out.extend(free_names(t));
        }
    }
    out
}

fn check(t: &Term, expected: &Type, what: &str) -> Result<(), TypeError> {
    let found = type_of(t)?;
    if &found == expected {
        Ok(())
    } else {
        Err(TypeError::TypeMismatch {
            path: what.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

fn check_seq(ts: &[Term], expected: &[Type], what: &str) -> Result<(), TypeError> {
    if ts.len() != expected.len() {
        return Err(TypeError::Malformed {
            path: what.to_string(),
            reason: format!("expected {} components, found {}", expected.len(), ts.len()),
        });
    }
    for (t, e) in ts.iter().zip(expected) {
        check(t, e, what)?;
    }
    Ok(())
}

fn while_head(
    rel: &Arc<Relation>,
    guard: &Term,
    step: &[Term],
    result: &[Type],
    component: usize,
) -> Term {
    Term::WhileRec {
        relation: rel.clone(),
        guard: Box::new(guard.clone()),
        step: step.to_vec(),
        result: result.to_vec(),
        component,
    }
}

/// `whiledo := whilerec (λx.x) (λx,y.y)`, one term per carrier component.
pub fn make_while_forward(
    rel: &Arc<Relation>,
    guard: &Term,
    step: &[Term],
) -> Result<Vec<Term>, TypeError> {
    let carrier = &rel.carrier;
    check(guard, &Type::arrows(carrier, Type::Nat), "whiledo guard")?;
    check_seq(step, &seq_arrow(carrier, carrier), "whiledo step")?;
    let mut avoid = BTreeSet::new();
    let xs = fresh_vars("x", carrier, &mut avoid);
    let ys = fresh_vars("y", carrier, &mut avoid);
    let u: Vec<Term> = var_terms(&xs).into_iter().map(|x| lams(&xs, x)).collect();
    let both: Vec<Binder> = xs.iter().chain(ys.iter()).cloned().collect();
    let f: Vec<Term> = var_terms(&ys).into_iter().map(|y| lams(&both, y)).collect();
    let mut args = u;
    args.extend(f);
    Ok((0..carrier.len())
        .map(|i| Term::apps(while_head(rel, guard, step, carrier, i), args.clone()))
        .collect())
}

/// `whiledoback := whilerec (λx,v.v) (λx,f,v. α x (f v))` with result type
/// `V -> V`, one term per dual component.
pub fn make_while_backward(
    rel: &Arc<Relation>,
    guard: &Term,
    step: &[Term],
    back: &[Term],
    dual: &[Type],
) -> Result<Vec<Term>, TypeError> {
    let carrier = &rel.carrier;
    check(guard, &Type::arrows(carrier, Type::Nat), "whiledoback guard")?;
    check_seq(step, &seq_arrow(carrier, carrier), "whiledoback step")?;
    let both: Vec<Type> = carrier.iter().chain(dual).cloned().collect();
    check_seq(back, &seq_arrow(&both, dual), "whiledoback backward")?;
    let result = seq_arrow(dual, dual);
    let mut avoid = avoid_of(&[back]);
    let xs = fresh_vars("x", carrier, &mut avoid);
    let fs = fresh_vars("f", &result, &mut avoid);
    let vs = fresh_vars("v", dual, &mut avoid);
    let xv: Vec<Binder> = xs.iter().chain(vs.iter()).cloned().collect();
    let u: Vec<Term> = var_terms(&vs).into_iter().map(|v| lams(&xv, v)).collect();
    let fv = apps(&var_terms(&fs), &var_terms(&vs));
    let mut call = var_terms(&xs);
    call.extend(fv);
    let xfv: Vec<Binder> = xs.iter().chain(fs.iter()).chain(vs.iter()).cloned().collect();
    let f: Vec<Term> = apps(back, &call).into_iter().map(|b| lams(&xfv, b)).collect();
    let mut args = u;
    args.extend(f);
    Ok((0..dual.len())
        .map(|j| Term::apps(while_head(rel, guard, step, &result, j), args.clone()))
        .collect())
}

/// Forward realizer of induction: `rec a`, of type `X -> nat -> X`.
pub fn make_forward_recursor(step: &[Term], carrier: &[Type]) -> Result<Vec<Term>, TypeError> {
    let with_nat: Vec<Type> = std::iter::once(Type::Nat).chain(carrier.iter().cloned()).collect();
    check_seq(step, &seq_arrow(&with_nat, carrier), "rec step")?;
    Ok((0..carrier.len())
        .map(|i| {
            Term::apps(
                Term::Rec {
                    carrier: carrier.to_vec(),
                    component: i,
                },
                step.iter().cloned(),
            )
        })
        .collect())
}

/// The backward recursor `rec* a α : X -> nat -> V -> V` with
/// `β0 = v` and `β(z+1) = α (x∸z∸1) (rec a y (x∸z∸1)) (β z)`.
pub fn make_backward_recursor(
    step: &[Term],
    back: &[Term],
    carrier: &[Type],
    dual: &[Type],
) -> Result<Vec<Term>, TypeError> {
    let forward = make_forward_recursor(step, carrier)?;
    let nat_x_v: Vec<Type> = std::iter::once(Type::Nat)
        .chain(carrier.iter().cloned())
        .chain(dual.iter().cloned())
        .collect();
    check_seq(back, &seq_arrow(&nat_x_v, dual), "rec* backward")?;
    let mut avoid = avoid_of(&[step, back]);
    let ys = fresh_vars("y", carrier, &mut avoid);
    let x = fresh_vars("n", &[Type::Nat], &mut avoid).remove(0);
    let vs = fresh_vars("v", dual, &mut avoid);
    let z = fresh_vars("z", &[Type::Nat], &mut avoid).remove(0);
    let bs = fresh_vars("b", dual, &mut avoid);
    let xt = Term::Var(x.0.clone(), Type::Nat);
    let zt = Term::Var(z.0.clone(), Type::Nat);
    let idx = monus(xt.clone(), Term::suc(zt));
    let mut state_args = var_terms(&ys);
    state_args.push(idx.clone());
    let state = apps(&forward, &state_args);
    let mut call = vec![idx];
    call.extend(state);
    call.extend(var_terms(&bs));
    let zb: Vec<Binder> = std::iter::once(z.clone()).chain(bs.iter().cloned()).collect();
    let body: Vec<Term> = apps(back, &call).into_iter().map(|t| lams(&zb, t)).collect();
    let mut outer: Vec<Binder> = ys.clone();
    outer.push(x);
    outer.extend(vs.iter().cloned());
    Ok((0..dual.len())
        .map(|j| {
            let mut args = body.clone();
            args.extend(var_terms(&vs));
            args.push(xt.clone());
            let r = Term::apps(
                Term::Rec {
                    carrier: dual.to_vec(),
                    component: j,
                },
                args,
            );
            lams(&outer, r)
        })
        .collect())
}

/// `b ∘ a = λx. b (a x)` over a witness block of type `domain`.
pub fn compose_forward(a: &[Term], b: &[Term], domain: &[Type]) -> Vec<Term> {
    let mut avoid = avoid_of(&[a, b]);
    let xs = fresh_vars("x", domain, &mut avoid);
    let ax = apps(a, &var_terms(&xs));
    apps(b, &ax).into_iter().map(|t| lams(&xs, t)).collect()
}

/// `α ∗_a β = λx,w. α x (β (a x) w)`.
pub fn compose_backward(
    a: &[Term],
    alpha: &[Term],
    beta: &[Term],
    domain: &[Type],
    dual: &[Type],
) -> Vec<Term> {
    let mut avoid = avoid_of(&[a, alpha, beta]);
    let xs = fresh_vars("x", domain, &mut avoid);
    let ws = fresh_vars("w", dual, &mut avoid);
    let x = var_terms(&xs);
    let mut inner_args = apps(a, &x);
    inner_args.extend(var_terms(&ws));
    let inner = apps(beta, &inner_args);
    let mut outer_args = x;
    outer_args.extend(inner);
    let binders: Vec<Binder> = xs.iter().chain(ws.iter()).cloned().collect();
    apps(alpha, &outer_args)
        .into_iter()
        .map(|t| lams(&binders, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::builtins::{add, nat_lt, pred};
    use crate::kernel::eval::evaluate;

    fn v(n: &str) -> Term {
        Term::var(n, Type::Nat)
    }

    fn nat_of(t: Term) -> u64 {
        evaluate(&t, 100_000).unwrap().as_numeral().unwrap()
    }

    fn countdown() -> (Term, Vec<Term>) {
        let guard = Term::lam("x", Type::Nat, Term::ite(v("x"), Term::numeral(1), Term::Zero));
        (guard, vec![Term::lam("x", Type::Nat, pred(v("x")))])
    }

    #[test]
    fn forward_while_counts_down() {
        let (guard, step) = countdown();
        let w = make_while_forward(&nat_lt(), &guard, &step).unwrap();
        assert_eq!(nat_of(Term::app(w[0].clone(), Term::numeral(3))), 0);
    }

    #[test]
    fn backward_while_threads_the_dual() {
        let (guard, step) = countdown();
        // α x v = v + x accumulates the visited states 3 + 2 + 1.
        let alpha = Term::lam("x", Type::Nat, Term::lam("v", Type::Nat, add(v("v"), v("x"))));
        let back = make_while_backward(&nat_lt(), &guard, &step, &[alpha], &[Type::Nat]).unwrap();
        let t = Term::apps(back[0].clone(), [Term::numeral(3), Term::numeral(10)]);
        assert_eq!(nat_of(t), 16);
        let t0 = Term::apps(back[0].clone(), [Term::Zero, Term::numeral(10)]);
        assert_eq!(nat_of(t0), 10);
    }

    #[test]
    fn backward_recursor_matches_the_unfolding() {
        // a n y = y + 2, α n y v = v * 10 + y  (encoded with add)
        let step = vec![Term::lam(
            "n",
            Type::Nat,
            Term::lam("y", Type::Nat, Term::suc(Term::suc(v("y")))),
        )];
        let back = vec![Term::lam(
            "n",
            Type::Nat,
            Term::lam(
                "y",
                Type::Nat,
                Term::lam("v", Type::Nat, add(crate::kernel::builtins::mul(v("v"), Term::numeral(10)), v("y"))),
            ),
        )];
        let rs = make_backward_recursor(&step, &back, &[Type::Nat], &[Type::Nat]).unwrap();
        let run = |y: u64, x: u64, vv: u64| {
            nat_of(Term::apps(
                rs[0].clone(),
                [Term::numeral(y), Term::numeral(x), Term::numeral(vv)],
            ))
        };
        // rec* a α y 0 v = v
        assert_eq!(run(1, 0, 7), 7);
        // rec* a α y 1 v = α 0 y v = 10v + y
        assert_eq!(run(1, 1, 7), 71);
        // rec* a α y 2 v = α 0 y (α 1 (a 0 y) v) = 10 (10v + (y+2)) + y
        assert_eq!(run(1, 2, 7), 10 * (70 + 3) + 1);
    }
}
