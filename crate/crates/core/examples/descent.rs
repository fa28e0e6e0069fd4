//! Loops carry a well-founded relation. The checker looks for a guarded
//! state the step fails to descend from, and evaluation stops at one.

use dialectica::check::{check_descent, Budget, Generator};
use dialectica::kernel::builtins::{nat_lt, pred};
use dialectica::kernel::eval::compiled::eval_closed;
use dialectica::kernel::operators::make_while_forward;
use dialectica::kernel::syntax::term_to_string;
use dialectica::kernel::{Term, Type};
use dialectica::logic::{chi, Formula};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gen = Generator::new(Budget::default());
    let lt = nat_lt();
    let x = Term::var("x", Type::Nat);
    let nonzero = Term::lam("x", Type::Nat, chi(&Formula::not(Formula::eq(x.clone(), Term::Zero)))?);
    for step in [pred(x.clone()), x.clone(), Term::suc(x.clone())] {
        let step = Term::lam("x", Type::Nat, step);
        let report = check_descent(&gen, &lt, &nonzero, std::slice::from_ref(&step))?;
        let w = make_while_forward(&lt, &nonzero, std::slice::from_ref(&step))?.remove(0);
        let run = eval_closed(&Term::app(w, Term::numeral(3)), 10_000);
        println!("step {}: {}", term_to_string(&step), report.verdict());
        match run {
            Ok(v) => println!("  whiledo 3 -> {:?}", v.nat()),
            Err(e) => println!("  whiledo 3 -> {e}"),
        }
    }
    Ok(())
}
