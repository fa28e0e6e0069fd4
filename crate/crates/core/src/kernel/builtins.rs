//! Arithmetic constants used by characteristic terms and deciders. Each is
//! implemented natively for speed and has a recursor definition it is tested
//! against.

use std::sync::{Arc, OnceLock};

use super::term::{Constant, Datum, Relation, Term};
use super::types::Type;

fn nat_arg(args: &[Datum], i: usize) -> Result<u64, String> {
    args[i].nat().ok_or_else(|| format!("argument {i} is not a numeral"))
}

fn unary(name: &str, f: fn(u64) -> u64) -> Arc<Constant> {
    Arc::new(Constant::native(name, Type::arrow(Type::Nat, Type::Nat), move |a| {
        Ok(Datum::Nat(f(nat_arg(a, 0)?)))
    }))
}

fn binary(name: &str, f: fn(u64, u64) -> Option<u64>) -> Arc<Constant> {
    let ty = Type::arrows(&[Type::Nat, Type::Nat], Type::Nat);
    Arc::new(Constant::native(name, ty, move |a| {
        let (x, y) = (nat_arg(a, 0)?, nat_arg(a, 1)?);
        f(x, y)
            .map(Datum::Nat)
            .ok_or_else(|| "arithmetic overflow".to_string())
    }))
}

macro_rules! cached {
    ($fn_name:ident, $init:expr) => {
        pub fn $fn_name() -> Arc<Constant> {
            static CELL: OnceLock<Arc<Constant>> = OnceLock::new();
            CELL.get_or_init(|| $init).clone()
        }
    };
}

cached!(pred_const, unary("pred", |x| x.saturating_sub(1)));
cached!(monus_const, binary("monus", |x, y| Some(x.saturating_sub(y))));
cached!(add_const, binary("add", u64::checked_add));
cached!(mul_const, binary("mul", u64::checked_mul));

pub fn pred(t: Term) -> Term {
    Term::app(Term::Const(pred_const()), t)
}

pub fn monus(a: Term, b: Term) -> Term {
    Term::apps(Term::Const(monus_const()), [a, b])
}

pub fn add(a: Term, b: Term) -> Term {
    Term::apps(Term::Const(add_const()), [a, b])
}

pub fn mul(a: Term, b: Term) -> Term {
    Term::apps(Term::Const(mul_const()), [a, b])
}

/// Looks a builtin up by its surface name.
pub fn lookup(name: &str) -> Option<Arc<Constant>> {
    match name {
        "pred" => Some(pred_const()),
        "monus" => Some(monus_const()),
        "add" => Some(add_const()),
        "mul" => Some(mul_const()),
        _ => None,
    }
}

fn rec_nat() -> Term {
    Term::Rec {
        carrier: vec![Type::Nat],
        component: 0,
    }
}

fn v(n: &str) -> Term {
    Term::var(n, Type::Nat)
}

/// `pred n = rec (λk,r.k) 0 n`
pub fn pred_by_recursion() -> Term {
    let step = Term::lam("k", Type::Nat, Term::lam("r", Type::Nat, v("k")));
    Term::lam("n", Type::Nat, Term::apps(rec_nat(), [step, Term::Zero, v("n")]))
}

/// `add x y = rec (λk,r. suc r) x y`
pub fn add_by_recursion() -> Term {
    let step = Term::lam("k", Type::Nat, Term::lam("r", Type::Nat, Term::suc(v("r"))));
    Term::lam(
        "x",
        Type::Nat,
        Term::lam("y", Type::Nat, Term::apps(rec_nat(), [step, v("x"), v("y")])),
    )
}

/// `monus x y = rec (λk,r. pred r) x y`
pub fn monus_by_recursion() -> Term {
    let step = Term::lam(
        "k",
        Type::Nat,
        Term::lam("r", Type::Nat, Term::app(pred_by_recursion(), v("r"))),
    );
    Term::lam(
        "x",
        Type::Nat,
        Term::lam("y", Type::Nat, Term::apps(rec_nat(), [step, v("x"), v("y")])),
    )
}

/// `mul x y = rec (λk,r. add r x) 0 y`
pub fn mul_by_recursion() -> Term {
    let step = Term::lam(
        "k",
        Type::Nat,
        Term::lam("r", Type::Nat, Term::apps(add_by_recursion(), [v("r"), v("x")])),
    );
    Term::lam(
        "x",
        Type::Nat,
        Term::lam("y", Type::Nat, Term::apps(rec_nat(), [step, Term::Zero, v("y")])),
    )
}

/// The usual `<` on nat, decided by `(y+1) - x`, with the identity as measure.
pub fn nat_lt() -> Arc<Relation> {
    static CELL: OnceLock<Arc<Relation>> = OnceLock::new();
    CELL.get_or_init(|| {
        let decider = Term::lam(
            "y",
            Type::Nat,
            Term::lam("x", Type::Nat, monus(Term::suc(v("y")), v("x"))),
        );
        Arc::new(Relation {
            name: "lt".into(),
            carrier: vec![Type::Nat],
            decider,
            measure: Some(Term::lam("x", Type::Nat, v("x"))),
        })
    })
    .clone()
}
