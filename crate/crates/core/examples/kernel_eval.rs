//! Build, type and evaluate kernel terms: a recursor, a conditional and a
//! while loop, with both evaluators.

use dialectica::kernel::builtins::{nat_lt, pred};
use dialectica::kernel::eval::compiled::eval_closed;
use dialectica::kernel::eval::reference::evaluate;
use dialectica::kernel::operators::make_while_forward;
use dialectica::kernel::syntax::{parse_term, term_to_string, Symbols};
use dialectica::kernel::typing::type_of;
use dialectica::kernel::{Term, Type};
use dialectica::logic::{chi, Formula};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let symbols = Symbols::new();
    // rec (λi r. suc r) 0 3 counts to 3.
    let count = parse_term("(app (rec nat) (lam (i nat) (r nat) (suc r)) 0 3)", &symbols)?;
    println!("{} : {}", term_to_string(&count), type_of(&count)?);
    println!("  reference -> {}", term_to_string(&evaluate(&count, 10_000)?));
    println!("  compiled  -> {:?}", eval_closed(&count, 10_000)?.nat());

    let cond = Term::ite(Term::Zero, Term::numeral(1), Term::Zero);
    println!("{} -> {}", term_to_string(&cond), term_to_string(&evaluate(&cond, 100)?));

    // whiledo over < with guard x ≠ 0 and step pred.
    let x = Term::var("x", Type::Nat);
    let guard = Term::lam("x", Type::Nat, chi(&Formula::not(Formula::eq(x.clone(), Term::Zero)))?);
    let step = Term::lam("x", Type::Nat, pred(x));
    let w = make_while_forward(&nat_lt(), &guard, &[step])?.remove(0);
    for start in [0, 3, 5] {
        let t = Term::app(w.clone(), Term::numeral(start));
        println!("whiledo {start} -> {:?}", eval_closed(&t, 10_000)?.nat());
    }
    Ok(())
}
