//! Signatures and matrices of formulas under the functional interpretation.

use dialectica::kernel::syntax::Symbols;
use dialectica::logic::syntax::{formula_to_string, parse_formula_document};
use dialectica::logic::translate;

const FORMULAS: &str = "
(const p (-> S nat)) (const q (-> S nat))
(eq x x)
(exists (x nat) (forall (y nat) (eq x y)))
(imp (exists (s S) (eq (app p s) 0)) (exists (s S) (eq (app q s) 0)))
(forall (x nat) (or (eq x 0) (exists (y nat) (eq x (suc y)))))
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut symbols = Symbols::new();
    symbols.declare("x", dialectica::kernel::Type::Nat);
    for p in parse_formula_document(FORMULAS, &mut symbols)? {
        let (w, c, m) = translate(&p);
        let show = |bs: &[(dialectica::kernel::Name, dialectica::kernel::Type)]| {
            bs.iter().map(|(n, t)| format!("{n}:{t}")).collect::<Vec<_>>().join(" ")
        };
        println!("{}", formula_to_string(&p));
        println!("  witnesses [{}]  counters [{}]", show(&w), show(&c));
        println!("  matrix {}", formula_to_string(&m));
    }
    Ok(())
}
