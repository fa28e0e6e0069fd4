//! Signatures, matrices, characteristic terms and D-implication on
//! hand-written formulas.

mod common;

use common::{nat, nat_value};
use dialectica::check::{d_implies, Budget, Generator};
use dialectica::dhl::same_formula;
use dialectica::kernel::builtins::add;
use dialectica::kernel::syntax::Symbols;
use dialectica::kernel::{Term, Type};
use dialectica::logic::syntax::parse_formula_document;
use dialectica::logic::{chi, matrix, signature, Formula};

fn parse(src: &str) -> Formula {
    parse_formula_document(src, &mut Symbols::new()).unwrap().remove(0)
}

fn fvar(x: &str, ty: Type) -> Term {
    Term::Var(x.into(), ty)
}

#[test]
fn atoms_have_empty_signatures_and_are_their_own_matrix() {
    let p = parse("(eq (suc 0) 0)");
    let s = signature(&p);
    assert!(s.witnesses.is_empty() && s.counters.is_empty());
    assert_eq!(matrix(&p, &[], &[]).unwrap(), p);
}

#[test]
fn one_witness_one_counter() {
    let s = signature(&parse("(exists (x nat) (forall (y nat) (eq x y)))"));
    assert_eq!((s.witnesses, s.counters), (vec![Type::Nat], vec![Type::Nat]));
}

#[test]
fn implication_between_existentials_over_a_state_sort() {
    let p = parse(
        "(const p (-> S nat)) (const q (-> S nat)) \
         (imp (exists (s S) (eq (app p s) 0)) (exists (s S) (eq (app q s) 0)))",
    );
    let s = signature(&p);
    assert_eq!(s.witnesses, vec![Type::arrow(Type::state(), Type::state())]);
    assert_eq!(s.counters, vec![Type::state()]);
}

// P := ∃x∀y (x = y), Q := ∃u∀v (u = v + 1).
fn p_q() -> (Formula, Formula) {
    (
        parse("(exists (x nat) (forall (y nat) (eq x y)))"),
        parse("(exists (u nat) (forall (v nat) (eq u (app add v 1))))"),
    )
}

fn p_at(x: Term, y: Term) -> Formula {
    Formula::eq(x, y)
}

fn q_at(u: Term, v: Term) -> Formula {
    Formula::eq(u, add(v, Term::numeral(1)))
}

#[test]
fn conjunction_matrix_splits_its_inputs() {
    let (p, q) = p_q();
    let m = matrix(&Formula::and(p, q), &[nat("a"), nat("b")], &[nat("c"), nat("d")]).unwrap();
    let want = Formula::and(p_at(nat("a"), nat("c")), q_at(nat("b"), nat("d")));
    assert!(same_formula(&m, &want), "{m:?}");
}

#[test]
fn implication_matrix_feeds_the_counter_function() {
    let (p, q) = p_q();
    let nn = Type::arrow(Type::Nat, Type::Nat);
    let f = fvar("f", nn.clone());
    let big_f = fvar("F", Type::arrow(Type::Nat, nn));
    let m = matrix(&Formula::imp(p, q), &[f.clone(), big_f.clone()], &[nat("x"), nat("v")]).unwrap();
    let want = Formula::imp(
        p_at(nat("x"), Term::apps(big_f, [nat("x"), nat("v")])),
        q_at(Term::app(f, nat("x")), nat("v")),
    );
    assert!(same_formula(&m, &want), "{m:?}");
}

#[test]
fn characteristic_terms() {
    let value = |src: &str| nat_value(&chi(&parse(src)).unwrap()).unwrap();
    assert_eq!(value("(eq 0 0)"), 0);
    assert_ne!(value("(eq (suc 0) 0)"), 0);
    // Truth table of A -> B, with 0 read as true.
    for (a, b, holds) in [("0", "0", true), ("0", "1", false), ("1", "0", true), ("1", "1", true)] {
        let v = value(&format!("(imp (eq {a} 0) (eq {b} 0))"));
        assert_eq!(v == 0, holds, "{a} {b}");
    }
}

#[test]
fn d_implication_examples() {
    let gen = Generator::new(Budget::default());
    let p = parse("(exists (x nat) (eq x 3))");
    assert!(d_implies(&gen, &p, &p).unwrap().passed());
    let weaker = parse("(exists (x nat) (and (eq x 3) (eq 0 0)))");
    assert!(d_implies(&gen, &p, &weaker).unwrap().passed());
    let wrong = parse("(exists (x nat) (eq x 4))");
    let r = d_implies(&gen, &p, &wrong).unwrap();
    let cx = r.counterexample.expect("x = 3 refutes it");
    assert_eq!(cx.assignment.len(), 1);
    assert_eq!(cx.assignment[0].1, "3");
}
