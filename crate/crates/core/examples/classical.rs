//! Rules for classical reasoning under the double-negation translation:
//! contraposition, the negation rule and composition through ¬¬Q.

use dialectica::check::{Budget, Generator};
use dialectica::dhl::{apply_rule, verify_triple, Params, RuleId, Session, Triple};
use dialectica::kernel::builtins::add;
use dialectica::kernel::syntax::term_to_string;
use dialectica::kernel::{Term, Type};
use dialectica::logic::Formula;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = |n: &str| Term::var(n, Type::Nat);
    let nn = Type::arrow(Type::Nat, Type::Nat);
    // Q := ∃u ∀w (u = w); the witness of ¬¬Q is a functional over counter functions.
    let q = Formula::exists("u", Type::Nat, Formula::forall("w", Type::Nat, Formula::eq(v("u"), v("w"))));
    let a = Term::lam("g", nn.clone(), Term::app(Term::var("g", nn), Term::numeral(1)));
    let t1 = Triple::new(Formula::Top, vec![a], vec![], Formula::not(Formula::not(q.clone())));
    let mut session = Session::new(Generator::new(Budget::default()));

    let n = apply_rule(RuleId::N, std::slice::from_ref(&t1), &Params { body: Some(q.clone()), ..Params::default() }, &mut session)?;
    println!("n:        {}", n.conclusion);

    let cp = apply_rule(RuleId::CP, std::slice::from_ref(&t1), &Params::default(), &mut session)?;
    println!("cp:       {}", cp.conclusion);

    // {Q} <λu. u + 1 | λu. suc u> {∃x (x = 3)} closes the composition.
    let r = Formula::exists("x", Type::Nat, Formula::eq(v("x"), Term::numeral(3)));
    let b = Term::lam("u", Type::Nat, add(v("u"), Term::numeral(1)));
    let beta = Term::lam("u", Type::Nat, Term::suc(v("u")));
    let t2 = Triple::new(q, vec![b], vec![beta], r);
    let out = apply_rule(RuleId::CompNeg, &[t1, t2], &Params::default(), &mut session)?.conclusion;
    println!("comp-neg: {out}");
    println!("  forward {}", term_to_string(&out.forward[0]));
    println!("  {}", verify_triple(&out, &Generator::new(Budget::default()))?.verdict());
    Ok(())
}
