use std::sync::Arc;

use super::EvalError;
use crate::kernel::subst::substitute_one;
use crate::kernel::term::{Constant, Datum, Relation, Term};

/// Big-step call-by-value evaluation of a closed term. Values are numerals,
/// opaque data, lambdas, and unsaturated applications of recursors or
/// constants.
pub fn evaluate(t: &Term, fuel: u64) -> Result<Term, EvalError> {
    Reference { fuel }.eval(t)
}

struct Reference {
    fuel: u64,
}

enum Head<'a> {
    Rec(usize, usize),
    While(&'a Arc<Relation>, &'a Term, &'a [Term], usize, usize),
    Const(&'a Arc<Constant>),
}

fn head_info(t: &Term) -> Option<(Head<'_>, usize)> {
    match t {
        Term::Rec { carrier, component } => {
            let m = carrier.len();
            Some((Head::Rec(m, *component), 2 * m + 1))
        }
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => {
            let arity = 2 * result.len() + relation.carrier.len();
            Some((
                Head::While(relation, guard, step, result.len(), *component),
                arity,
            ))
        }
        Term::Const(c) => Some((Head::Const(c), c.arity())),
        _ => None,
    }
}

fn numeral(t: &Term) -> Result<u64, EvalError> {
    t.as_numeral()
        .ok_or_else(|| EvalError::Stuck(format!("expected a numeral, found {t:?}")))
}

impl Reference {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.fuel == 0 {
            return Err(EvalError::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, t: &Term) -> Result<Term, EvalError> {
        self.tick()?;
        match t {
            Term::Zero | Term::Lam(..) | Term::Opaque(_) => Ok(t.clone()),
            Term::Suc(a) => {
                let v = self.eval(a)?;
                numeral(&v)?;
                Ok(Term::suc(v))
            }
            Term::Var(n, _) => Err(EvalError::Stuck(format!("free variable {n}"))),
            Term::Rec { .. } | Term::WhileRec { .. } => Ok(t.clone()),
            Term::Const(c) => {
                if c.arity() == 0 {
                    self.fire_const(c, &[])
                } else {
                    Ok(t.clone())
                }
            }
            Term::Ite(b, s, e) => {
                let bv = self.eval(b)?;
                if numeral(&bv)? == 0 {
                    self.eval(s)
                } else {
                    self.eval(e)
                }
            }
            Term::App(f, a) => {
                let fv = self.eval(f)?;
                let av = self.eval(a)?;
                self.apply(fv, av)
            }
        }
    }

    fn apply(&mut self, f: Term, a: Term) -> Result<Term, EvalError> {
        self.tick()?;
        if let Term::Lam(x, _, body) = &f {
            let reduced = substitute_one(body, x, &a);
            return self.eval(&reduced);
        }
        let spine = Term::app(f, a);
        let (head, args) = spine.spine();
        let Some((info, arity)) = head_info(head) else {
            return Err(EvalError::Stuck(format!("cannot apply {head:?}")));
        };
        if args.len() < arity {
            return Ok(spine.clone());
        }
        let args: Vec<Term> = args.into_iter().cloned().collect();
        match info {
            Head::Rec(m, j) => self.fire_rec(m, j, &args),
            Head::While(rel, guard, step, u, j) => self.fire_while(rel, guard, step, u, j, &args),
            Head::Const(c) => self.fire_const(c, &args),
        }
    }

    fn apply_all(&mut self, f: &Term, args: &[Term]) -> Result<Term, EvalError> {
        let mut cur = f.clone();
        for a in args {
            cur = self.apply(cur, a.clone())?;
        }
        Ok(cur)
    }

    fn fire_rec(&mut self, m: usize, j: usize, args: &[Term]) -> Result<Term, EvalError> {
        let z = &args[..m];
        let mut acc: Vec<Term> = args[m..2 * m].to_vec();
        let n = numeral(&args[2 * m])?;
        for k in 0..n {
            self.tick()?;
            let mut call = vec![Term::numeral(k)];
            call.extend(acc.iter().cloned());
            let mut next = Vec::with_capacity(m);
            for zi in z {
                next.push(self.apply_all(zi, &call)?);
            }
            acc = next;
        }
        Ok(acc.swap_remove(j))
    }

    fn fire_while(
        &mut self,
        rel: &Arc<Relation>,
        guard: &Term,
        step: &[Term],
        u: usize,
        j: usize,
        args: &[Term],
    ) -> Result<Term, EvalError> {
        let (base, rest) = args.split_at(u);
        let (fun, start) = rest.split_at(u);
        let mut x: Vec<Term> = start.to_vec();
        let mut visited = Vec::new();
        loop {
            self.tick()?;
            let g = self.apply_all(guard, &x)?;
            if numeral(&g)? != 0 {
                break;
            }
            let mut next = Vec::with_capacity(step.len());
            for s in step {
                next.push(self.apply_all(s, &x)?);
            }
            let mut dargs = next.clone();
            dargs.extend(x.iter().cloned());
            let below = self.apply_all(&rel.decider, &dargs)?;
            let mut ok = numeral(&below)? == 0;
            if ok {
                if let Some(measure) = &rel.measure {
                    let before = numeral(&self.apply_all(measure, &x)?)?;
                    let after = numeral(&self.apply_all(measure, &next)?)?;
                    ok = after < before;
                }
            }
            if !ok {
                return Err(EvalError::DescentViolation {
                    relation: rel.name.to_string(),
                    at: show_seq(&x),
                });
            }
            visited.push(std::mem::replace(&mut x, next));
        }
        let mut acc = Vec::with_capacity(u);
        for b in base {
            acc.push(self.apply_all(b, &x)?);
        }
        while let Some(prev) = visited.pop() {
            let mut call = prev;
            call.extend(acc.iter().cloned());
            let mut next = Vec::with_capacity(u);
            for f in fun {
                next.push(self.apply_all(f, &call)?);
            }
            acc = next;
        }
        Ok(acc.swap_remove(j))
    }

    fn fire_const(&mut self, c: &Arc<Constant>, args: &[Term]) -> Result<Term, EvalError> {
        let Some(native) = c.implementation() else {
            return Err(EvalError::Stuck(format!("uninterpreted constant {}", c.name)));
        };
        let mut data = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Term::Opaque(o) => data.push(Datum::Opaque(o.clone())),
                other => data.push(Datum::Nat(numeral(other)?)),
            }
        }
        match native(&data) {
            Ok(Datum::Nat(n)) => Ok(Term::numeral(n)),
            Ok(Datum::Opaque(o)) => Ok(Term::Opaque(o)),
            Err(reason) => Err(EvalError::Native {
                name: c.name.to_string(),
                reason,
            }),
        }
    }
}

fn show_seq(xs: &[Term]) -> String {
    let parts: Vec<String> = xs.iter().map(crate::kernel::syntax::term_to_string).collect();
    parts.join(", ")
}
