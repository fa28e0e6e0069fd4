//! Property tests. Structures are drawn from seeded grammars so that a
//! shrunk failure is reported as a reproducible seed.

mod common;

use std::collections::BTreeSet;

use common::{nat, nat_value, random_realizer, realize, reference, truth, unfold_all, Grammar, FUEL};
use dialectica::check::{Budget, Generator};
use dialectica::dhl::script::{parse_script, script_to_string};
use dialectica::dhl::{apply_rule, same_formula, verify_triple, Params, RuleId, Session, Triple};
use dialectica::kernel::builtins::{self, pred};
use dialectica::kernel::eval::compiled::eval_closed;
use dialectica::kernel::eval::reference::evaluate;
use dialectica::kernel::eval::EvalError;
use dialectica::kernel::normalize::{nf_eq, normalize};
use dialectica::kernel::operators::make_while_forward;
use dialectica::kernel::seq::fresh_vars;
use dialectica::kernel::subst::{constant_names, free_names};
use dialectica::kernel::syntax::Symbols;
use dialectica::kernel::typing::type_of;
use dialectica::kernel::{Name, Term, Type};
use dialectica::logic::syntax::{formula_to_string, parse_formula};
use dialectica::logic::{chi, matrix, signature, Formula};
use dialectica::loopd::random::{nat_command, vec_chain};
use dialectica::loopd::{forward_run, parse_command, run, Command, Env, LoopError, NatEnv, Pred, StateModel, VecR, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn n_scope() -> Vec<(Name, Type)> {
    vec![(Name::from("n"), Type::Nat)]
}

fn closed_nat_term(seed: u64) -> Term {
    let mut r = rng(seed);
    let ty = Type::arrows(&[Type::Nat, Type::arrow(Type::Nat, Type::Nat)], Type::Nat);
    let f = random_realizer(&mut r, &ty, &[]);
    let g = random_realizer(&mut r, &Type::arrow(Type::Nat, Type::Nat), &[]);
    Term::apps(f, [Term::numeral(r.gen_range(0..6)), g])
}

fn translation_vars(p: &Formula) -> (Vec<Term>, Vec<Term>) {
    let sig = signature(p);
    let mut avoid = p.free_names();
    let w = fresh_vars("w", &sig.witnesses, &mut avoid);
    let c = fresh_vars("c", &sig.counters, &mut avoid);
    let terms = |bs: Vec<(Name, Type)>| bs.into_iter().map(|(n, t)| Term::Var(n, t)).collect();
    (terms(w), terms(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_preserves_types(seed in any::<u64>()) {
        let t = closed_nat_term(seed);
        prop_assert_eq!(type_of(&t).unwrap(), Type::Nat);
        prop_assert_eq!(type_of(&normalize(&t)).unwrap(), Type::Nat);
        let v = evaluate(&t, FUEL).unwrap();
        prop_assert_eq!(type_of(&v).unwrap(), Type::Nat);
    }

    #[test]
    fn evaluators_agree_and_repeat(seed in any::<u64>()) {
        let t = closed_nat_term(seed);
        let a = nat_value(&t).unwrap();
        prop_assert_eq!(nat_value(&t).unwrap(), a);
        prop_assert_eq!(eval_closed(&t, FUEL).unwrap().nat(), Some(a));
        prop_assert_eq!(nat_value(&normalize(&t)).unwrap(), a);
    }

    #[test]
    fn recursor_equations(seed in any::<u64>(), y in 0u64..6, x in 0u64..6) {
        let mut r = rng(seed);
        let step = random_realizer(&mut r, &Type::arrows(&[Type::Nat, Type::Nat], Type::Nat), &[]);
        let rec = |n: u64| Term::apps(
            Term::Rec { carrier: vec![Type::Nat], component: 0 },
            [step.clone(), Term::numeral(y), Term::numeral(n)],
        );
        prop_assert_eq!(nat_value(&rec(0)).unwrap(), y);
        let here = nat_value(&rec(x)).unwrap();
        let unfolded = Term::apps(step.clone(), [Term::numeral(x), Term::numeral(here)]);
        prop_assert_eq!(nat_value(&rec(x + 1)).unwrap(), nat_value(&unfolded).unwrap());
    }

    #[test]
    fn while_unfolds_once(x in 0u64..12, k in 0u64..4) {
        // whiledo s = ite (guard s) (whiledo (a s)) s, with guard s ≠ k, a = pred
        // and s ≥ k.
        let lt = builtins::nat_lt();
        let xv = nat("x");
        let guard_f = Formula::not(Formula::eq(xv.clone(), Term::numeral(k)));
        let guard = Term::lam("x", Type::Nat, chi(&guard_f).unwrap());
        let step = Term::lam("x", Type::Nat, pred(xv));
        let w = make_while_forward(&lt, &guard, std::slice::from_ref(&step)).unwrap().remove(0);
        let at = |t: Term| Term::app(w.clone(), t);
        let start = Term::numeral(k + x);
        let lhs = nat_value(&at(start.clone())).unwrap();
        let rhs = Term::ite(Term::app(guard, start.clone()), at(Term::app(step, start)), Term::numeral(k + x));
        prop_assert_eq!(lhs, nat_value(&rhs).unwrap());
        prop_assert_eq!(lhs, k);
    }

    #[test]
    fn kernel_descent_violation_exactly_when_the_step_climbs(i in 0usize..16, x in 0u64..9, k in 0u64..3) {
        // Walk x while x ≠ k; the step must drop below x at every guarded state.
        let steps = Generator::new(Budget::default()).candidates(&Type::arrow(Type::Nat, Type::Nat)).unwrap();
        let step = steps[i % steps.len()].term.clone();
        let lt = builtins::nat_lt();
        let guard_f = Formula::not(Formula::eq(nat("x"), Term::numeral(k)));
        let guard = Term::lam("x", Type::Nat, chi(&guard_f).unwrap());
        let w = make_while_forward(&lt, &guard, std::slice::from_ref(&step)).unwrap().remove(0);
        let mut s = x;
        let expected = loop {
            if s == k {
                break Some(s);
            }
            let next = nat_value(&Term::app(step.clone(), Term::numeral(s))).unwrap();
            if next >= s {
                break None;
            }
            s = next;
        };
        let program = Term::app(w, Term::numeral(x));
        let compiled = eval_closed(&program, FUEL).map(|v| v.nat());
        let reference = evaluate(&program, FUEL);
        match expected {
            Some(v) => {
                prop_assert_eq!(compiled.unwrap(), Some(v));
                prop_assert_eq!(reference.unwrap(), Term::numeral(v));
            }
            None => {
                let descent = |e: &EvalError| matches!(e, EvalError::DescentViolation { .. });
                prop_assert!(compiled.as_ref().err().is_some_and(descent), "{:?}", compiled);
                prop_assert!(reference.as_ref().err().is_some_and(descent), "{:?}", reference);
            }
        }
    }

    #[test]
    fn translation_matches_reference(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = Grammar::rich().formula(&mut r, &n_scope(), 4);
        let sig = signature(&p);
        let (rw, rc) = reference::signature(&p);
        prop_assert_eq!(&sig.witnesses, &rw);
        prop_assert_eq!(&sig.counters, &rc);
        let (w, c) = translation_vars(&p);
        let m = matrix(&p, &w, &c).unwrap();
        prop_assert!(m.is_quantifier_free());
        let ours = unfold_all(&m).map_terms(&normalize);
        let theirs = reference::matrix(&p, &w, &c).map_terms(&normalize);
        prop_assert!(ours.alpha_eq(&theirs));
    }

    #[test]
    fn matrix_mentions_only_its_inputs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = Grammar::rich().formula(&mut r, &n_scope(), 3);
        let (w, c) = translation_vars(&p);
        let m = matrix(&p, &w, &c).unwrap();
        let mut allowed: BTreeSet<Name> = p.free_names();
        for t in w.iter().chain(&c) {
            allowed.extend(free_names(t));
        }
        prop_assert!(m.free_names().is_subset(&allowed));
        // Every term in the matrix is a well-typed nat.
        let ctx = m.free_vars().into_iter().collect();
        prop_assert!(m.check(&ctx).is_ok());
    }

    #[test]
    fn tagged_disjunction_unfolds(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut g = Grammar::rich();
        let (a, b) = (g.formula(&mut r, &n_scope(), 2), g.formula(&mut r, &n_scope(), 2));
        let t = g.nat_term(&mut r, &n_scope(), 1);
        let tagged = Formula::or_t(t.clone(), a.clone(), b.clone());
        let unfolded = Formula::unfold_or_t(&t, &a, &b);
        let (s1, s2) = (signature(&tagged), signature(&unfolded));
        prop_assert_eq!(&s1.witnesses, &s2.witnesses);
        prop_assert_eq!(&s1.counters, &s2.counters);
        let (w, c) = translation_vars(&tagged);
        let m1 = unfold_all(&matrix(&tagged, &w, &c).unwrap()).map_terms(&normalize);
        let m2 = unfold_all(&matrix(&unfolded, &w, &c).unwrap()).map_terms(&normalize);
        prop_assert!(m1.alpha_eq(&m2));
    }

    #[test]
    fn characteristic_term_decides(seed in any::<u64>()) {
        let mut r = rng(seed);
        let phi = Grammar::small().qf(&mut r, &[], 3);
        let c = chi(&phi).unwrap();
        prop_assert_eq!(nat_value(&c).unwrap() == 0, truth(&phi).unwrap());
    }

    #[test]
    fn formulas_print_and_parse_back(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = Grammar::rich().formula(&mut r, &n_scope(), 4);
        let mut symbols = Symbols::new();
        symbols.vars.insert(Name::from("n"), Type::Nat);
        let back = parse_formula(&formula_to_string(&p), &symbols).unwrap();
        prop_assert!(back.alpha_eq(&p), "{}", formula_to_string(&p));
    }

    #[test]
    fn commands_print_and_parse_back(seed in any::<u64>()) {
        let mut r = rng(seed);
        let c = nat_command(&mut r, 5, &["x", "y", "z"]);
        let back = parse_command(&c.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), c.to_string());
        let v = vec_chain(&mut r, 6, 2);
        prop_assert_eq!(parse_command(&v.to_string()).unwrap().to_string(), v.to_string());
    }

    #[test]
    fn state_literals_round_trip(a in 0u64..100, b in 0u64..100, xs in proptest::collection::vec(-1e6f64..1e6, 1..4)) {
        let m = NatEnv::new();
        let s = Env::state(&[("x", a), ("y", b)]);
        prop_assert!(m.eq_state(&m.parse_state(&s.to_string()).unwrap(), &s));
        let vm = VecR::new(xs.len());
        let v = Vector::state(xs.clone());
        prop_assert!(vm.eq_state(&vm.parse_state(&v.to_string()).unwrap(), &v));
    }

    #[test]
    fn stacks_follow_the_trace(seed in any::<u64>(), x in 0u64..5, y in 0u64..5) {
        let mut r = rng(seed);
        let m = NatEnv::new();
        let c = nat_command(&mut r, 5, &["x", "y", "z"]);
        let s = Env::state(&[("x", x), ("y", y), ("z", 1)]);
        let t = Env::dual(&[("x", 1), ("y", 2), ("z", 3)]);
        if let Ok(out) = forward_run(&m, &c, s.clone(), FUEL) {
            prop_assert_eq!(out.frame.len(), out.trace.forward_count());
            prop_assert_eq!(out.frame.states.len(), out.frame.commands.len());
            let (s2, t2, trace) = run(&m, &c, s.clone(), t.clone(), FUEL).unwrap();
            prop_assert_eq!(trace.backward_count(), trace.forward_count());
            prop_assert!(m.eq_state(&s2, &out.state));
            // Deterministic.
            let (s3, t3, trace3) = run(&m, &c, s, t, FUEL).unwrap();
            prop_assert!(m.eq_state(&s2, &s3) && m.eq_dual(&t2, &t3));
            prop_assert_eq!(trace, trace3);
        }
    }

    #[test]
    fn loops_unfold(seed in any::<u64>(), x in 0u64..6) {
        // while g do B  ≡  if g then (B; while g do B) else skip
        let mut r = rng(seed);
        let m = NatEnv::new();
        let inner = nat_command(&mut r, 3, &["y", "z"]);
        let body = Command::seq(inner, Command::prim("dec:x"));
        let guard = dialectica::loopd::parse_pred("(ne x 0)").unwrap();
        let w = Command::while_do(dialectica::loopd::Order::Lt("x".into()), guard.clone(), body.clone());
        let unfolded = Command::ite(guard, Command::seq(body, w.clone()), Command::Skip);
        let s = Env::state(&[("x", x), ("y", 1), ("z", 2)]);
        let t = Env::dual(&[("x", 0), ("y", 1), ("z", 1)]);
        match (run(&m, &w, s.clone(), t.clone(), FUEL), run(&m, &unfolded, s, t, FUEL)) {
            (Ok((s1, t1, _)), Ok((s2, t2, _))) => prop_assert!(m.eq_state(&s1, &s2) && m.eq_dual(&t1, &t2)),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} versus {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn descent_violations_exactly_when_the_order_fails(x in 0u64..8, bump in 0u64..3) {
        // The body moves x to x - 1 + bump; only bump = 0 descends.
        let m = NatEnv::new();
        let body = if bump == 0 {
            "(prim dec:x)".to_string()
        } else {
            format!("(seq (prim dec:x) (seq {}))", vec!["(prim inc:x)"; bump as usize].join(" "))
        };
        let c = parse_command(&format!("(while (lt x) (ne x 0) {body})")).unwrap();
        let out = run(&m, &c, Env::state(&[("x", x)]), Env::dual(&[("x", 0)]), FUEL);
        let violated = matches!(out, Err(LoopError::DescentViolation { .. }));
        prop_assert_eq!(violated, x != 0 && bump > 0);
    }

    #[test]
    fn gradients_are_linear_in_the_seed(seed in any::<u64>(), k in -3.0f64..3.0) {
        let mut r = rng(seed);
        let model = VecR::new(2);
        let c = vec_chain(&mut r, 6, 2);
        let point = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let g1 = dialectica::loopd::gradient(&model, &c, &point, &[1.0, 0.0], FUEL).unwrap();
        let gk = dialectica::loopd::gradient(&model, &c, &point, &[k, 0.0], FUEL).unwrap();
        for (a, b) in g1.iter().zip(&gk) {
            prop_assert!((a * k - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

fn epsilon_free(t: &Triple) -> bool {
    let consts: BTreeSet<Name> = t.forward.iter().chain(&t.backward).flat_map(constant_names).collect();
    !consts.iter().any(|c| c.starts_with("eps"))
        && !formula_to_string(&t.pre).contains("eps")
        && !formula_to_string(&t.post).contains("eps")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn epsilons_are_fresh_and_resolve_away(k in 0u64..4, j in 0u64..4) {
        // {∀y (y = y)} <λ.k, λ.j | -> {∃x ∃z (x = k ∧ z = j)}, opened twice.
        let post = Formula::exists("x", Type::Nat, Formula::exists("z", Type::Nat, Formula::and(
            Formula::eq(nat("x"), Term::numeral(k)),
            Formula::eq(nat("z"), Term::numeral(j)),
        )));
        let pre = Formula::forall("y", Type::Nat, Formula::eq(nat("y"), nat("y")));
        let (fwd, _) = Triple::new(pre.clone(), vec![], vec![], post.clone()).realizer_types();
        prop_assert!(fwd.iter().all(|t| *t == Type::Nat));
        let t = Triple::new(pre, vec![Term::numeral(k), Term::numeral(j)], vec![Term::Zero], post);
        let mut session = Session::new(Generator::new(Budget { nat_max: 4, ..Budget::default() }));
        let once = apply_rule(RuleId::EpsilonR, &[t], &Params::default(), &mut session).unwrap().conclusion;
        let twice = apply_rule(RuleId::EpsilonR, &[once], &Params::default(), &mut session).unwrap().conclusion;
        let names: Vec<&str> = session.epsilons.iter().map(|e| e.name.as_str()).collect();
        prop_assert_eq!(names, vec!["eps1", "eps2"]);
        let resolved = twice.resolve(&session.epsilons);
        prop_assert!(epsilon_free(&resolved));
        let gen = Generator::new(Budget { nat_max: 4, ..Budget::default() });
        prop_assert!(dialectica::dhl::verify_triple(&resolved, &gen).unwrap().passed());
    }
}

fn premise(r: &mut ChaCha8Rng, gen: &Generator) -> Option<Triple> {
    let mut g = Grammar::small();
    let (pre, post) = (g.shallow(r, &n_scope()), g.shallow(r, &n_scope()));
    realize(r, gen, &pre, &post, &[nat("n")], 25)
}

fn symbolic(tys: &[Type], base: &str, avoid: &mut BTreeSet<Name>) -> Vec<Term> {
    fresh_vars(base, tys, avoid).into_iter().map(|(n, t)| Term::Var(n, t)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn primed_right_disjunction_is_the_tagged_one_with_tag_zero(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gen = Generator::new(Budget { nat_max: 4, ..Budget::default() });
        let t = premise(&mut r, &gen);
        prop_assume!(t.is_some());
        let t = t.unwrap();
        let other = Grammar::small().shallow(&mut r, &n_scope());
        let params = Params { other: Some(other), ..Params::default() };
        let mut session = Session::new(Generator::new(Budget { nat_max: 4, ..Budget::default() }));
        let plain = apply_rule(RuleId::OrR, std::slice::from_ref(&t), &params, &mut session).unwrap().conclusion;
        let primed = apply_rule(RuleId::OrRPrime, &[t], &params, &mut session).unwrap().conclusion;
        prop_assert_eq!(primed.forward.len(), plain.forward.len() + 1);
        let xs = symbolic(&signature(&primed.pre).witnesses, "x", &mut primed.pre.free_names());
        prop_assert!(nf_eq(&Term::apps(primed.forward[0].clone(), xs), &Term::Zero));
        for (a, b) in primed.forward[1..].iter().zip(&plain.forward).chain(primed.backward.iter().zip(&plain.backward)) {
            prop_assert!(nf_eq(a, b));
        }
        let mut avoid = primed.post.free_names();
        let w = symbolic(&signature(&plain.post).witnesses, "w", &mut avoid);
        let c = symbolic(&signature(&plain.post).counters, "c", &mut avoid);
        let tagged: Vec<Term> = std::iter::once(Term::Zero).chain(w.iter().cloned()).collect();
        let lhs = unfold_all(&matrix(&primed.post, &tagged, &c).unwrap());
        let rhs = unfold_all(&matrix(&plain.post, &w, &c).unwrap());
        prop_assert!(same_formula(&lhs, &rhs));
        prop_assert!(verify_triple(&primed, &gen).unwrap().passed());
    }

    #[test]
    fn primed_left_case_split_dispatches_on_the_tag(seed in any::<u64>()) {
        let mut r = rng(seed);
        let gen = Generator::new(Budget { nat_max: 4, ..Budget::default() });
        let t1 = premise(&mut r, &gen);
        prop_assume!(t1.is_some());
        let t1 = t1.unwrap();
        let pre2 = Grammar::small().shallow(&mut r, &n_scope());
        let t2 = realize(&mut r, &gen, &pre2, &t1.post, &[nat("n")], 25);
        prop_assume!(t2.is_some());
        let t2 = t2.unwrap();
        let mut session = Session::new(Generator::new(Budget { nat_max: 4, ..Budget::default() }));
        let out = apply_rule(RuleId::CondLPrime, &[t1.clone(), t2.clone()], &Params::default(), &mut session).unwrap().conclusion;
        let mut avoid = out.pre.free_names();
        let xs = symbolic(&signature(&t1.pre).witnesses, "x", &mut avoid);
        let ys = symbolic(&signature(&t2.pre).witnesses, "y", &mut avoid);
        for (tag, chosen, args) in [(Term::Zero, &t1, &xs), (Term::suc(Term::Zero), &t2, &ys)] {
            let call: Vec<Term> = std::iter::once(tag).chain(xs.iter().cloned()).chain(ys.iter().cloned()).collect();
            for (f, g) in out.forward.iter().zip(&chosen.forward) {
                prop_assert!(nf_eq(&Term::apps(f.clone(), call.clone()), &Term::apps(g.clone(), args.clone())));
            }
        }
        prop_assert!(verify_triple(&out, &gen).unwrap().passed());
    }
}

#[test]
fn scripts_print_and_parse_back() {
    for (_, src, _) in dialectica::cli::selftest::SCRIPTS {
        let s = parse_script(src).unwrap();
        let printed = script_to_string(&s);
        let again = parse_script(&printed).unwrap();
        assert_eq!(script_to_string(&again), printed);
    }
}

#[test]
fn generators_are_reproducible() {
    let ty = Type::arrow(Type::Nat, Type::Nat);
    let show = |seed| {
        let g = Generator::new(Budget { seed, ..Budget::default() });
        g.candidates(&ty).unwrap().iter().map(|c| c.show()).collect::<Vec<_>>()
    };
    assert_eq!(show(5), show(5));
}

#[test]
fn guard_predicates_parse() {
    let p: Pred = dialectica::loopd::parse_pred("(and (ne x 0) (lt y 3))").unwrap();
    assert_eq!(dialectica::loopd::parse_pred(&p.to_string()).unwrap().to_string(), p.to_string());
}

#[test]
fn synthesized_realizers_are_closed_over_the_goal() {
    for (name, src, _) in dialectica::cli::selftest::SCRIPTS {
        let script = parse_script(src).unwrap();
        let gen = Generator::new(Budget::default());
        let out = dialectica::dhl::synthesize(&script.root, gen).unwrap();
        let t = &out.resolved;
        let allowed: BTreeSet<Name> = t.pre.free_names().union(&t.post.free_names()).cloned().collect();
        for r in t.forward.iter().chain(&t.backward) {
            let fv = free_names(r);
            assert!(fv.is_subset(&allowed), "{name}: {} has free {:?}", dialectica::kernel::syntax::term_to_string(r), fv);
        }
    }
}
