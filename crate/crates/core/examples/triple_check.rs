//! Falsification testing of Dialectica triples: one that holds within the
//! budget and one with a concrete counterexample.

use dialectica::check::{Budget, Generator};
use dialectica::dhl::{verify_triple, Triple};
use dialectica::kernel::{Term, Type};
use dialectica::logic::Formula;

fn exactly(k: u64) -> Formula {
    Formula::exists("x", Type::Nat, Formula::eq(Term::var("x", Type::Nat), Term::numeral(k)))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gen = Generator::new(Budget { nat_max: 10, ..Budget::default() });
    let succ = Term::lam("x", Type::Nat, Term::suc(Term::var("x", Type::Nat)));
    for target in [4, 5] {
        let t = Triple::new(exactly(3), vec![succ.clone()], vec![], exactly(target));
        let report = verify_triple(&t, &gen)?;
        println!("{t}\n  {}", report.verdict());
    }
    Ok(())
}
