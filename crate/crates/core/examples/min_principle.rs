//! Synthesize the shipped minimum-principle derivation and run its loop
//! realizer on a concrete predicate and step function.

use dialectica::check::generate::table_constant;
use dialectica::check::{Budget, Generator};
use dialectica::dhl::script::parse_script;
use dialectica::dhl::synthesize;
use dialectica::kernel::eval::{Compiled, Machine, Value};
use dialectica::kernel::syntax::{parse_term, term_to_string, Symbols};
use dialectica::kernel::subst::substitute_one;
use dialectica::kernel::{Name, Term};

const SCRIPT: &str = include_str!("../scripts/min_principle.dhl");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let script = parse_script(SCRIPT)?;
    let out = synthesize(&script.root, Generator::new(Budget::default()))?;
    let realizer = &out.resolved.backward[0];
    println!("backward realizer: {}", term_to_string(realizer));

    // θ holds (value 0) at 2, 5 and 7; the step g subtracts two.
    let theta: Vec<u64> = (0..=8).map(|t| if [2, 5, 7].contains(&t) { 0 } else { 1 }).collect();
    let th = Term::Const(table_constant(1, 9, theta));
    let closed = substitute_one(realizer, &Name::from("th"), &th);
    let compiled = Compiled::new(&closed, &[])?;
    let mut machine = Machine::new(1_000_000);
    let f = compiled.run(&mut machine, &[])?;
    let minus_two = parse_term("(lam (x nat) (app monus x 2))", &Symbols::new())?;
    let g = Compiled::new(&minus_two, &[])?.run(&mut machine, &[])?;
    for x in [7u64, 8, 2] {
        let u = machine.apply_all(&f, &[g.clone(), Value::Nat(x)])?;
        println!("start {x}: the loop stops at {:?}", u.nat());
    }
    Ok(())
}
