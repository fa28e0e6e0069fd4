//! Test inputs per type. Every generated function maps `0..=N` back into
//! `0..=N`, so premise realizers are never probed outside the range they were
//! checked on.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Budget, CheckError};
use crate::kernel::builtins::{monus, pred};
use crate::kernel::eval::compiled::eval_closed;
use crate::kernel::eval::Value;
use crate::kernel::seq::{fresh_vars, lams, var_terms};
use crate::kernel::syntax::term_to_string;
use crate::kernel::{Constant, Datum, Term, Type};

/// A closed test input: its term for display and its evaluated value.
#[derive(Clone)]
pub struct Candidate {
    pub term: Term,
    pub value: Value,
}

impl Candidate {
    pub fn show(&self) -> String {
        term_to_string(&self.term)
    }
}

/// Candidates per (type, depth).
type Cache = RefCell<BTreeMap<(Type, usize), Rc<Vec<Candidate>>>>;

pub struct Generator {
    pub budget: Budget,
    cache: Cache,
}

/// `min(x + 1, cap)`.
pub fn capped_suc(x: Term, cap: u64) -> Term {
    Term::ite(monus(Term::numeral(cap), x.clone()), x.clone(), Term::suc(x))
}

/// A native lookup table over nat arguments, out-of-range arguments clamped
/// to the last entry.
pub fn table_constant(arity: usize, size: usize, entries: Vec<u64>) -> Arc<Constant> {
    let shown: Vec<String> = entries.iter().map(u64::to_string).collect();
    let label = format!("tbl{arity}[{}]", shown.join(","));
    let ty = Type::arrows(&vec![Type::Nat; arity], Type::Nat);
    Arc::new(Constant::native(&label, ty, move |args| {
        let mut idx = 0usize;
        for a in args {
            let n = a.nat().ok_or("table argument is not a numeral")? as usize;
            idx = idx * size + n.min(size - 1);
        }
        Ok(Datum::Nat(entries[idx]))
    }))
}

impl Generator {
    pub fn new(budget: Budget) -> Generator {
        Generator {
            budget,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn candidates(&self, ty: &Type) -> Result<Rc<Vec<Candidate>>, CheckError> {
        self.candidates_at(ty, self.budget.fn_depth)
    }

    fn candidates_at(&self, ty: &Type, depth: usize) -> Result<Rc<Vec<Candidate>>, CheckError> {
        let key = (ty.clone(), depth);
        if let Some(c) = self.cache.borrow().get(&key) {
            return Ok(c.clone());
        }
        let terms = self.terms(ty, depth)?;
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for t in terms {
            if !seen.insert(term_to_string(&t)) {
                continue;
            }
            let value = eval_closed(&t, self.budget.fuel)
                .map_err(|e| CheckError::Generator(format!("{}: {e}", term_to_string(&t))))?;
            out.push(Candidate { term: t, value });
        }
        if out.is_empty() {
            return Err(CheckError::UnevaluableHigherType(ty.to_string()));
        }
        let rc = Rc::new(out);
        self.cache.borrow_mut().insert(key, rc.clone());
        Ok(rc)
    }

    fn base_terms(&self, ty: &Type) -> Result<Vec<Term>, CheckError> {
        match ty {
            Type::Nat => Ok((0..=self.budget.nat_max).map(Term::numeral).collect()),
            Type::Abstract(s) => self
                .budget
                .carriers
                .get(s.as_ref())
                .cloned()
                .filter(|c| !c.is_empty())
                .ok_or_else(|| CheckError::UnevaluableHigherType(s.to_string())),
            Type::Arrow(..) => unreachable!("base_terms on an arrow"),
        }
    }

    fn terms(&self, ty: &Type, depth: usize) -> Result<Vec<Term>, CheckError> {
        let (args, result) = ty.uncurry();
        if args.is_empty() {
            return self.base_terms(ty);
        }
        if depth == 0 {
            return Err(CheckError::UnevaluableHigherType(ty.to_string()));
        }
        let args: Vec<Type> = args.into_iter().cloned().collect();
        let binders = fresh_vars("a", &args, &mut Default::default());
        let vars = var_terms(&binders);
        let mut bodies: Vec<Term> = self.base_terms(result)?;
        for v in &vars {
            if &type_of_var(v) == result {
                bodies.push(v.clone());
            }
        }
        if depth >= 2 {
            if result.is_nat() {
                for v in &vars {
                    if type_of_var(v).is_nat() {
                        bodies.push(pred(v.clone()));
                        bodies.push(capped_suc(v.clone(), self.budget.nat_max));
                    }
                }
            }
            // Apply function arguments to the first argument of each needed
            // type, or to a constant of it.
            for g in &vars {
                let gt = type_of_var(g);
                let (gargs, gres) = gt.uncurry();
                if gargs.is_empty() || gres != result {
                    continue;
                }
                let mut call = Vec::new();
                let mut ok = true;
                for a in gargs {
                    if let Some(v) = vars.iter().find(|v| &type_of_var(v) == a) {
                        call.push(v.clone());
                    } else if !matches!(a, Type::Arrow(..)) {
                        call.push(self.base_terms(a)?.remove(0));
                    } else {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    bodies.push(Term::apps(g.clone(), call));
                }
            }
            if result.is_nat() && args.iter().all(Type::is_nat) && args.len() <= 2 {
                bodies.extend(self.tables(&args, &vars));
            }
        }
        Ok(bodies.into_iter().map(|b| lams(&binders, b)).collect())
    }

    fn tables(&self, args: &[Type], vars: &[Term]) -> Vec<Term> {
        let size = (self.budget.nat_max + 1) as usize;
        let cells = size.pow(args.len() as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(self.budget.seed ^ (0x7ab1e << args.len()));
        (0..self.budget.tables)
            .map(|_| {
                let entries: Vec<u64> = (0..cells)
                    .map(|_| rng.gen_range(0..=self.budget.nat_max))
                    .collect();
                let c = table_constant(args.len(), size, entries);
                Term::apps(Term::Const(c), vars.iter().cloned())
            })
            .collect()
    }
}

fn type_of_var(v: &Term) -> Type {
    match v {
        Term::Var(_, t) => t.clone(),
        _ => unreachable!("generator variables are variables"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::eval::Machine;

    fn gen(depth: usize) -> Generator {
        Generator::new(Budget {
            nat_max: 4,
            fn_depth: depth,
            ..Budget::default()
        })
    }

    #[test]
    fn nat_range_is_inclusive() {
        let c = gen(1).candidates(&Type::Nat).unwrap();
        assert_eq!(c.len(), 5);
    }

    #[test]
    fn generated_functions_stay_in_range() {
        let g = gen(2);
        let ty = Type::arrow(Type::Nat, Type::Nat);
        let fs = g.candidates(&ty).unwrap();
        assert!(fs.len() > 8);
        let mut m = Machine::new(100_000);
        for f in fs.iter() {
            for x in 0..=4 {
                let y = m.apply(f.value.clone(), Value::Nat(x)).unwrap().nat().unwrap();
                assert!(y <= 4, "{} {x} = {y}", f.show());
            }
        }
    }

    #[test]
    fn depth_zero_has_no_functions() {
        let ty = Type::arrow(Type::Nat, Type::Nat);
        assert!(matches!(
            gen(0).candidates(&ty),
            Err(CheckError::UnevaluableHigherType(_))
        ));
    }

    #[test]
    fn missing_carrier_is_reported() {
        assert!(matches!(
            gen(1).candidates(&Type::state()),
            Err(CheckError::UnevaluableHigherType(_))
        ));
    }
}
