//! Denotation of commands as kernel terms `C+ : S -> S` and
//! `C- : S -> T -> T`. Primitives, guards and orders become native
//! constants over the abstract sorts; the structure is built with the
//! kernel's composition, conditional and while operators.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{Command, LoopError, Order, Pred, StateModel};
use crate::kernel::eval::{Compiled, Machine, Value};
use crate::kernel::operators::{compose_backward, compose_forward, make_while_backward, make_while_forward};
use crate::kernel::seq::{fresh_vars, lams, var_terms};
use crate::kernel::{Constant, Datum, Opaque, Relation, Term, Type};

pub struct Decomposed {
    pub forward: Term,
    pub backward: Term,
}

fn state_of<M: StateModel>(d: &Datum) -> Result<M::S, String> {
    d.opaque()
        .and_then(|o| o.downcast::<M::S>())
        .cloned()
        .ok_or_else(|| "argument is not a state".to_string())
}

fn dual_of<M: StateModel>(d: &Datum) -> Result<M::T, String> {
    d.opaque()
        .and_then(|o| o.downcast::<M::T>())
        .cloned()
        .ok_or_else(|| "argument is not a dual".to_string())
}

fn guard_constant<M: StateModel>(model: &M, guard: &Pred) -> Term {
    let (m, g) = (model.clone(), guard.clone());
    let ty = Type::arrow(Type::state(), Type::Nat);
    Term::Const(Arc::new(Constant::native(&format!("chi{guard}"), ty, move |a| {
        let s = state_of::<M>(&a[0])?;
        let holds = g.holds(&m, &s, None).map_err(|e| e.to_string())?;
        Ok(Datum::Nat(if holds { 0 } else { 1 }))
    })))
}

fn relation<M: StateModel>(model: &M, order: &Order) -> Arc<Relation> {
    let (m, o) = (model.clone(), order.clone());
    let ty = Type::arrows(&[Type::state(), Type::state()], Type::Nat);
    let decider = Constant::native(&format!("below{order}"), ty, move |a| {
        let (after, before) = (state_of::<M>(&a[0])?, state_of::<M>(&a[1])?);
        let b = m.below(&o, &after, &before).map_err(|e| e.to_string())?;
        Ok(Datum::Nat(if b { 0 } else { 1 }))
    });
    Arc::new(Relation {
        name: order.to_string().into(),
        carrier: vec![Type::state()],
        decider: Term::Const(Arc::new(decider)),
        measure: None,
    })
}

/// Builds `(C+, C-)`: skip is `(λs.s, λs,t.t)`, a primitive is its pair of
/// native maps, sequencing composes forward and backward, a conditional
/// branches on the guard in both columns, and a loop is the pair of while
/// operators.
pub fn decompose<M: StateModel>(model: &M, c: &Command) -> Result<Decomposed, LoopError> {
    let (s_ty, t_ty) = (Type::state(), Type::dual());
    let mut avoid = BTreeSet::new();
    let st = fresh_vars("s", &[s_ty.clone(), t_ty.clone()], &mut avoid);
    let (s, t) = (var_terms(&st[..1]).remove(0), var_terms(&st[1..]).remove(0));
    Ok(match c {
        Command::Skip => Decomposed {
            forward: lams(&st[..1], s),
            backward: lams(&st, t),
        },
        Command::Prim(name) => {
            let p = model.primitive(name)?;
            let (pf, pb) = (p.clone(), p);
            let fwd = Constant::native(&format!("{name}+"), Type::arrow(s_ty.clone(), s_ty.clone()), move |a| {
                let s = state_of::<M>(&a[0])?;
                let out = pf.forward(&s).map_err(|e| e.to_string())?;
                Ok(Datum::Opaque(Opaque::new(out)))
            });
            let bwd = Constant::native(
                &format!("{name}-"),
                Type::arrows(&[s_ty.clone(), t_ty.clone()], t_ty.clone()),
                move |a| {
                    let (s, t) = (state_of::<M>(&a[0])?, dual_of::<M>(&a[1])?);
                    let out = pb.backward(&s, &t).map_err(|e| e.to_string())?;
                    Ok(Datum::Opaque(Opaque::new(out)))
                },
            );
            Decomposed {
                forward: Term::Const(Arc::new(fwd)),
                backward: Term::Const(Arc::new(bwd)),
            }
        }
        Command::Seq(a, b) => {
            let (a, b) = (decompose(model, a)?, decompose(model, b)?);
            let dom = [s_ty.clone()];
            let fwd = compose_forward(std::slice::from_ref(&a.forward), std::slice::from_ref(&b.forward), &dom);
            let bwd = compose_backward(
                std::slice::from_ref(&a.forward),
                std::slice::from_ref(&a.backward),
                std::slice::from_ref(&b.backward),
                &dom,
                &[t_ty],
            );
            Decomposed {
                forward: fwd[0].clone(),
                backward: bwd[0].clone(),
            }
        }
        Command::If(guard, a, b) => {
            let (a, b) = (decompose(model, a)?, decompose(model, b)?);
            let test = Term::app(guard_constant(model, guard), s.clone());
            let fwd = Term::ite(test.clone(), Term::app(a.forward, s.clone()), Term::app(b.forward, s.clone()));
            let bwd = Term::ite(
                test,
                Term::apps(a.backward, [s.clone(), t.clone()]),
                Term::apps(b.backward, [s, t]),
            );
            Decomposed {
                forward: lams(&st[..1], fwd),
                backward: lams(&st, bwd),
            }
        }
        Command::While(order, guard, body) => {
            let body = decompose(model, body)?;
            let rel = relation(model, order);
            let chi = guard_constant(model, guard);
            let step = [body.forward];
            let kernel = |e: crate::kernel::typing::TypeError| LoopError::Kernel(e.to_string());
            let fwd = make_while_forward(&rel, &chi, &step).map_err(kernel)?;
            let bwd = make_while_backward(&rel, &chi, &step, &[body.backward], &[t_ty]).map_err(kernel)?;
            Decomposed {
                forward: fwd[0].clone(),
                backward: bwd[0].clone(),
            }
        }
    })
}

/// Evaluates the decomposition: `(C+ s, C- s t)`.
pub fn denote<M: StateModel>(model: &M, c: &Command, s: &M::S, t: &M::T, fuel: u64) -> Result<(M::S, M::T), LoopError> {
    let d = decompose(model, c)?;
    let kernel = |e: crate::kernel::eval::EvalError| match e {
        crate::kernel::eval::EvalError::FuelExhausted => LoopError::FuelExhausted,
        e => LoopError::Kernel(e.to_string()),
    };
    let mut machine = Machine::new(fuel);
    let sv = Value::Opaque(Opaque::new(s.clone()));
    let tv = Value::Opaque(Opaque::new(t.clone()));
    let f = Compiled::closed(&d.forward).map_err(kernel)?.run(&mut machine, &[]).map_err(kernel)?;
    let b = Compiled::closed(&d.backward).map_err(kernel)?.run(&mut machine, &[]).map_err(kernel)?;
    let s2 = machine.apply(f, sv.clone()).map_err(kernel)?;
    let t2 = machine.apply_all(&b, &[sv, tv]).map_err(kernel)?;
    let s2 = s2
        .opaque()
        .and_then(|o| o.downcast::<M::S>())
        .cloned()
        .ok_or_else(|| LoopError::Kernel("forward result is not a state".into()))?;
    let t2 = t2
        .opaque()
        .and_then(|o| o.downcast::<M::T>())
        .cloned()
        .ok_or_else(|| LoopError::Kernel("backward result is not a dual".into()))?;
    Ok((s2, t2))
}
