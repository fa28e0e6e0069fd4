//! The induction rule: from a step triple {P(x)} <a | α> {P(x+1)} it builds
//! {P(0)} <rec a | rec* a α> {P(x)}. Here P(x) says y bounds 2x.

use dialectica::check::{Budget, Generator};
use dialectica::dhl::{apply_rule, verify_triple, Params, RuleId, Session, Triple};
use dialectica::kernel::builtins::{add, monus};
use dialectica::kernel::syntax::term_to_string;
use dialectica::kernel::{Name, Term, Type};
use dialectica::logic::Formula;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = |n: &str| Term::var(n, Type::Nat);
    let p = |x: Term| Formula::exists("y", Type::Nat, Formula::eq(monus(add(x.clone(), x), v("y")), Term::Zero));
    let next = p(Term::suc(v("x")));
    // a = λy. y + 2 moves a bound for 2x to one for 2(x+1).
    let step = Term::lam("y", Type::Nat, add(v("y"), Term::numeral(2)));
    let premise = Triple::new(p(v("x")), vec![step], vec![], next);
    let gen = Generator::new(Budget { nat_max: 6, ..Budget::default() });
    println!("premise: {}", verify_triple(&premise, &gen)?.verdict());

    let params = Params { binders: vec![(Name::from("x"), Type::Nat)], ..Params::default() };
    let mut session = Session::new(Generator::new(Budget { nat_max: 6, ..Budget::default() }));
    let concl = apply_rule(RuleId::Ind, &[premise], &params, &mut session)?.conclusion;
    println!("{concl}");
    for t in &concl.forward {
        println!("  forward {}", term_to_string(t));
    }
    println!("conclusion: {}", verify_triple(&concl, &gen)?.verdict());
    Ok(())
}
