use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use super::EvalError;
use crate::kernel::term::{Constant, Datum, Name, Opaque, Relation, Term};

/// Term compiled to de Bruijn form against an ordered list of free variables.
#[derive(Clone)]
pub enum Code {
    Local(usize),
    Lam(Rc<Code>),
    App(Rc<Code>, Rc<Code>),
    Zero,
    Suc(Rc<Code>),
    Rec { width: usize, component: usize },
    Ite(Rc<Code>, Rc<Code>, Rc<Code>),
    While(Rc<WhileCode>),
    Const(Arc<Constant>),
    Opaque(Opaque),
}

pub struct WhileCode {
    relation: Arc<Relation>,
    decider: Value,
    measure: Option<Value>,
    guard: Code,
    step: Vec<Code>,
    width: usize,
    component: usize,
}

#[derive(Clone)]
pub enum Env {
    Nil,
    Cons(Rc<(Value, Env)>),
}

impl Env {
    fn lookup(&self, mut i: usize) -> Option<&Value> {
        let mut cur = self;
        loop {
            match cur {
                Env::Nil => return None,
                Env::Cons(cell) => {
                    if i == 0 {
                        return Some(&cell.0);
                    }
                    i -= 1;
                    cur = &cell.1;
                }
            }
        }
    }

    fn push(&self, v: Value) -> Env {
        Env::Cons(Rc::new((v, self.clone())))
    }
}

#[derive(Clone)]
pub enum Value {
    Nat(u64),
    Opaque(Opaque),
    Closure(Rc<Code>, Env),
    Partial(Rc<Head>, Rc<Vec<Value>>),
}

pub enum Head {
    Rec { width: usize, component: usize },
    While {
        code: Rc<WhileCode>,
        guard: Value,
        step: Vec<Value>,
    },
    Const(Arc<Constant>),
}

impl Head {
    fn arity(&self) -> usize {
        match self {
            Head::Rec { width, .. } => 2 * width + 1,
            Head::While { code, .. } => 2 * code.width + code.relation.carrier.len(),
            Head::Const(c) => c.arity(),
        }
    }
}

impl Value {
    pub fn nat(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn opaque(&self) -> Option<&Opaque> {
        match self {
            Value::Opaque(o) => Some(o),
            _ => None,
        }
    }

    /// Ground values as terms; functions have no readback here.
    pub fn to_term(&self) -> Option<Term> {
        match self {
            Value::Nat(n) => Some(Term::numeral(*n)),
            Value::Opaque(o) => Some(Term::Opaque(o.clone())),
            _ => None,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Opaque(o) => write!(f, "{o}"),
            Value::Closure(..) => write!(f, "<closure>"),
            Value::Partial(h, args) => match h.as_ref() {
                Head::Const(c) => write!(f, "<{} applied to {}>", c.name, args.len()),
                _ => write!(f, "<recursor applied to {}>", args.len()),
            },
        }
    }
}

/// A compiled term together with the names of its free variables, in the
/// order their values must be supplied.
#[derive(Clone)]
pub struct Compiled {
    pub inputs: Vec<Name>,
    code: Code,
}

impl Compiled {
    pub fn new(t: &Term, inputs: &[Name]) -> Result<Compiled, EvalError> {
        let mut scope: Vec<Name> = inputs.to_vec();
        let code = compile(t, &mut scope)?;
        Ok(Compiled {
            inputs: inputs.to_vec(),
            code,
        })
    }

    pub fn closed(t: &Term) -> Result<Compiled, EvalError> {
        Compiled::new(t, &[])
    }

    pub fn run(&self, machine: &mut Machine, inputs: &[Value]) -> Result<Value, EvalError> {
        assert_eq!(inputs.len(), self.inputs.len(), "input arity");
        let mut env = Env::Nil;
        for v in inputs {
            env = env.push(v.clone());
        }
        machine.eval(&self.code, &env)
    }
}

fn compile(t: &Term, scope: &mut Vec<Name>) -> Result<Code, EvalError> {
    Ok(match t {
        Term::Var(n, _) => {
            let i = scope
                .iter()
                .rev()
                .position(|s| s == n)
                .ok_or_else(|| EvalError::Stuck(format!("free variable {n}")))?;
            Code::Local(i)
        }
        Term::Lam(x, _, body) => {
            scope.push(x.clone());
            let b = compile(body, scope);
            scope.pop();
            Code::Lam(Rc::new(b?))
        }
        Term::App(f, a) => Code::App(Rc::new(compile(f, scope)?), Rc::new(compile(a, scope)?)),
        Term::Zero => Code::Zero,
        Term::Suc(a) => Code::Suc(Rc::new(compile(a, scope)?)),
        Term::Rec { carrier, component } => Code::Rec {
            width: carrier.len(),
            component: *component,
        },
        Term::Ite(b, s, e) => Code::Ite(
            Rc::new(compile(b, scope)?),
            Rc::new(compile(s, scope)?),
            Rc::new(compile(e, scope)?),
        ),
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => {
            let mut m = Machine::new(u64::MAX);
            let decider = m.eval(&compile(&relation.decider, &mut Vec::new())?, &Env::Nil)?;
            let measure = match &relation.measure {
                Some(t) => Some(m.eval(&compile(t, &mut Vec::new())?, &Env::Nil)?),
                None => None,
            };
            Code::While(Rc::new(WhileCode {
                relation: relation.clone(),
                decider,
                measure,
                guard: compile(guard, scope)?,
                step: step
                    .iter()
                    .map(|s| compile(s, scope))
                    .collect::<Result<_, _>>()?,
                width: result.len(),
                component: *component,
            }))
        }
        Term::Const(c) => Code::Const(c.clone()),
        Term::Opaque(o) => Code::Opaque(o.clone()),
    })
}

/// Evaluation state: just the remaining fuel.
pub struct Machine {
    pub fuel: u64,
}

impl Machine {
    pub fn new(fuel: u64) -> Machine {
        Machine { fuel }
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        if self.fuel == 0 {
            return Err(EvalError::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, code: &Code, env: &Env) -> Result<Value, EvalError> {
        self.tick()?;
        match code {
            Code::Local(i) => env
                .lookup(*i)
                .cloned()
                .ok_or_else(|| EvalError::Stuck(format!("unbound index {i}"))),
            Code::Lam(body) => Ok(Value::Closure(body.clone(), env.clone())),
            Code::App(f, a) => {
                let fv = self.eval(f, env)?;
                let av = self.eval(a, env)?;
                self.apply(fv, av)
            }
            Code::Zero => Ok(Value::Nat(0)),
            Code::Suc(a) => {
                let n = as_nat(self.eval(a, env)?)?;
                Ok(Value::Nat(n + 1))
            }
            Code::Rec { width, component } => Ok(Value::Partial(
                Rc::new(Head::Rec {
                    width: *width,
                    component: *component,
                }),
                Rc::new(Vec::new()),
            )),
            Code::Ite(b, s, e) => {
                let bv = self.eval(b, env)?;
                if as_nat(bv)? == 0 {
                    self.eval(s, env)
                } else {
                    self.eval(e, env)
                }
            }
            Code::While(w) => {
                let guard = self.eval(&w.guard, env)?;
                let step = w
                    .step
                    .iter()
                    .map(|s| self.eval(s, env))
                    .collect::<Result<_, _>>()?;
                Ok(Value::Partial(
                    Rc::new(Head::While {
                        code: w.clone(),
                        guard,
                        step,
                    }),
                    Rc::new(Vec::new()),
                ))
            }
            Code::Const(c) => {
                if c.arity() == 0 {
                    self.fire_const(c, &[])
                } else {
                    Ok(Value::Partial(Rc::new(Head::Const(c.clone())), Rc::new(Vec::new())))
                }
            }
            Code::Opaque(o) => Ok(Value::Opaque(o.clone())),
        }
    }

    pub fn apply(&mut self, f: Value, a: Value) -> Result<Value, EvalError> {
        self.tick()?;
        match f {
            Value::Closure(body, env) => self.eval(&body, &env.push(a)),
            Value::Partial(head, args) => {
                let mut args = Rc::try_unwrap(args).unwrap_or_else(|rc| (*rc).clone());
                args.push(a);
                if args.len() < head.arity() {
                    return Ok(Value::Partial(head, Rc::new(args)));
                }
                match head.as_ref() {
                    Head::Rec { width, component } => self.fire_rec(*width, *component, &args),
                    Head::While { code, guard, step } => self.fire_while(code, guard, step, &args),
                    Head::Const(c) => self.fire_const(c, &args),
                }
            }
            other => Err(EvalError::Stuck(format!("cannot apply {other:?}"))),
        }
    }

    pub fn apply_all(&mut self, f: &Value, args: &[Value]) -> Result<Value, EvalError> {
        let mut cur = f.clone();
        for a in args {
            cur = self.apply(cur, a.clone())?;
        }
        Ok(cur)
    }

    fn fire_rec(&mut self, m: usize, j: usize, args: &[Value]) -> Result<Value, EvalError> {
        let z = &args[..m];
        let mut acc: Vec<Value> = args[m..2 * m].to_vec();
        let n = as_nat(args[2 * m].clone())?;
        for k in 0..n {
            self.tick()?;
            let mut call = Vec::with_capacity(m + 1);
            call.push(Value::Nat(k));
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
        w: &WhileCode,
        guard: &Value,
        step: &[Value],
        args: &[Value],
    ) -> Result<Value, EvalError> {
        let u = w.width;
        let (base, rest) = args.split_at(u);
        let (fun, start) = rest.split_at(u);
        let mut x: Vec<Value> = start.to_vec();
        let mut visited = Vec::new();
        loop {
            self.tick()?;
            let g = self.apply_all(guard, &x)?;
            if as_nat(g)? != 0 {
                break;
            }
            let mut next = Vec::with_capacity(step.len());
            for s in step {
                next.push(self.apply_all(s, &x)?);
            }
            let mut dargs = next.clone();
            dargs.extend(x.iter().cloned());
            let below = self.apply_all(&w.decider, &dargs)?;
            let mut ok = as_nat(below)? == 0;
            if ok {
                if let Some(measure) = &w.measure {
                    let before = self.apply_all(measure, &x)?;
                    let after = self.apply_all(measure, &next)?;
                    ok = as_nat(after)? < as_nat(before)?;
                }
            }
            if !ok {
                let shown: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
                return Err(EvalError::DescentViolation {
                    relation: w.relation.name.to_string(),
                    at: shown.join(", "),
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
        Ok(acc.swap_remove(w.component))
    }

    fn fire_const(&mut self, c: &Arc<Constant>, args: &[Value]) -> Result<Value, EvalError> {
        let Some(native) = c.implementation() else {
            return Err(EvalError::Stuck(format!("uninterpreted constant {}", c.name)));
        };
        let mut data = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Value::Nat(n) => data.push(Datum::Nat(*n)),
                Value::Opaque(o) => data.push(Datum::Opaque(o.clone())),
                other => {
                    return Err(EvalError::Stuck(format!(
                        "native {} applied to non-ground {other:?}",
                        c.name
                    )))
                }
            }
        }
        match native(&data) {
            Ok(Datum::Nat(n)) => Ok(Value::Nat(n)),
            Ok(Datum::Opaque(o)) => Ok(Value::Opaque(o)),
            Err(reason) => Err(EvalError::Native {
                name: c.name.to_string(),
                reason,
            }),
        }
    }
}

fn as_nat(v: Value) -> Result<u64, EvalError> {
    v.nat()
        .ok_or_else(|| EvalError::Stuck(format!("expected a numeral, found {v:?}")))
}

/// Evaluates a closed term to a value with the compiled machine.
pub fn eval_closed(t: &Term, fuel: u64) -> Result<Value, EvalError> {
    let c = Compiled::closed(t)?;
    c.run(&mut Machine::new(fuel), &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::builtins::{add, monus};
    use crate::kernel::term::name;
    use crate::kernel::types::Type;

    #[test]
    fn inputs_bind_in_order() {
        let t = monus(Term::var("a", Type::Nat), Term::var("b", Type::Nat));
        let c = Compiled::new(&t, &[name("a"), name("b")]).unwrap();
        let mut m = Machine::new(1000);
        let out = c.run(&mut m, &[Value::Nat(7), Value::Nat(3)]).unwrap();
        assert_eq!(out.nat(), Some(4));
    }

    #[test]
    fn closures_capture_their_environment() {
        let x = Term::var("x", Type::Nat);
        let y = Term::var("y", Type::Nat);
        let t = Term::app(
            Term::app(
                Term::lam("x", Type::Nat, Term::lam("y", Type::Nat, add(x, y))),
                Term::numeral(2),
            ),
            Term::numeral(5),
        );
        assert_eq!(eval_closed(&t, 1000).unwrap().nat(), Some(7));
    }
}
