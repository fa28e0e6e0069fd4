//! LOOP_D machine checks against hand-composed oracles.

mod common;

use common::FUEL;
use dialectica::loopd::hoare::{check_loopd_triple, Contract, TripleBudget};
use dialectica::loopd::models::Env;
use dialectica::loopd::{
    backward_run, check_contracts, denote, forward_run, gradient, parse_command, parse_pred, run, Command, NatEnv,
    Primitive, StateModel, Trace, VecR,
};

fn with(e: &Env, x: &str, v: u64) -> Env {
    let mut out = e.clone();
    out.vals.insert(x.to_string(), v);
    out
}

fn x_of(e: &Env) -> u64 {
    e.get("x").unwrap()
}

/// Two primitives whose backward maps read the popped state, so that any
/// mix-up in the stack order changes the result.
fn model() -> NatEnv {
    let mut m = NatEnv::new();
    m.register(Primitive::new(
        "dbl",
        |s: &Env| Ok(with(s, "x", 2 * x_of(s))),
        |s: &Env, t: &Env| Ok(with(t, "x", x_of(t) + x_of(s))),
    ));
    m.register(Primitive::new(
        "sq",
        |s: &Env| Ok(with(s, "x", x_of(s) * x_of(s))),
        |s: &Env, t: &Env| Ok(with(t, "x", x_of(t) * (x_of(s) + 1))),
    ));
    m
}

// Oracles: the maps written out by hand.
fn c_dbl(s: u64) -> u64 {
    2 * s
}
fn g_dbl(s: u64, t: u64) -> u64 {
    t + s
}
fn c_sq(s: u64) -> u64 {
    s * s
}
fn g_sq(s: u64, t: u64) -> u64 {
    t * (s + 1)
}

#[test]
fn skip_pushes_nothing() {
    let m = model();
    let out = forward_run(&m, &Command::Skip, Env::state(&[("x", 4)]), FUEL).unwrap();
    assert_eq!(x_of(&out.state), 4);
    assert!(out.frame.is_empty());
    let mut frame = out.frame;
    let t = backward_run::<NatEnv>(&mut frame, 0, Env::dual(&[("x", 9)]), &mut Trace::default()).unwrap();
    assert_eq!(x_of(&t), 9);
}

#[test]
fn primitive_pushes_its_prestate() {
    let m = model();
    let out = forward_run(&m, &Command::prim("dbl"), Env::state(&[("x", 3)]), FUEL).unwrap();
    assert_eq!(x_of(&out.state), c_dbl(3));
    assert_eq!(out.frame.states.iter().map(x_of).collect::<Vec<_>>(), vec![3]);
    assert_eq!(out.frame.commands[0].name, "dbl");
    let mut frame = out.frame;
    let t = backward_run::<NatEnv>(&mut frame, 1, Env::dual(&[("x", 5)]), &mut Trace::default()).unwrap();
    assert_eq!(x_of(&t), g_dbl(3, 5));
}

#[test]
fn sequence_stacks_in_order_and_pops_in_reverse() {
    let m = model();
    let c = Command::seq(Command::prim("dbl"), Command::prim("sq"));
    for s0 in 0..6 {
        for t in 0..6 {
            let out = forward_run(&m, &c, Env::state(&[("x", s0)]), FUEL).unwrap();
            let s1 = c_dbl(s0);
            assert_eq!(x_of(&out.state), c_sq(s1));
            // Bottom first: [s0, c1 s0].
            assert_eq!(out.frame.states.iter().map(x_of).collect::<Vec<_>>(), vec![s0, s1]);
            let names: Vec<&str> = out.frame.commands.iter().map(|p| p.name.as_str()).collect();
            assert_eq!(names, vec!["dbl", "sq"]);
            let mut frame = out.frame;
            let back = backward_run::<NatEnv>(&mut frame, 2, Env::dual(&[("x", t)]), &mut Trace::default()).unwrap();
            let want = g_dbl(s0, g_sq(s1, t));
            assert_eq!(x_of(&back), want);
            let (_, dt) = denote(&m, &c, &Env::state(&[("x", s0)]), &Env::dual(&[("x", t)]), FUEL).unwrap();
            assert_eq!(x_of(&dt), want);
        }
    }
}

#[test]
fn loop_with_false_guard_is_skip() {
    let m = NatEnv::new();
    let c = parse_command("(while (lt x) (ne x 0) (prim dec:x))").unwrap();
    let (s, t, trace) = run(&m, &c, Env::state(&[("x", 0)]), Env::dual(&[("x", 7)]), FUEL).unwrap();
    assert_eq!((x_of(&s), x_of(&t)), (0, 7));
    assert_eq!(trace.forward_count(), 0);
}

#[test]
fn countdown_matches_its_unfolding() {
    let m = NatEnv::new();
    let c = parse_command("(while (lt x) (ne x 0) (prim dec:x))").unwrap();
    for x in 0..8 {
        let (s, _, trace) = run(&m, &c, Env::state(&[("x", x)]), Env::dual(&[("x", 0)]), FUEL).unwrap();
        assert_eq!(x_of(&s), 0);
        assert_eq!((trace.forward_count(), trace.backward_count()), (x as usize, x as usize));
    }
}

#[test]
fn skip_triple_holds() {
    let m = NatEnv::new();
    let p = parse_pred("(le x 3)").unwrap();
    let states: Vec<Env> = (0..6).map(|x| Env::state(&[("x", x)])).collect();
    let duals: Vec<Env> = (0..3).map(|x| Env::dual(&[("x", x)])).collect();
    let r = check_loopd_triple(&m, &p, &Command::Skip, &p, &states, &duals, &TripleBudget::default()).unwrap();
    assert!(r.passed(), "{}", r.verdict());
}

#[test]
fn while_rule_shape() {
    // [x ≤ 5 ∧ x ≠ 0] dec [x ≤ 5] and dec descends, so [x ≤ 5] while [x ≤ 5 ∧ x = 0].
    let m = NatEnv::new();
    let inv = parse_pred("(le x 5)").unwrap();
    let body = parse_command("(prim dec:x)").unwrap();
    let states: Vec<Env> = (0..9).map(|x| Env::state(&[("x", x)])).collect();
    let duals: Vec<Env> = (0..3).map(|x| Env::dual(&[("x", x)])).collect();
    let b = TripleBudget::default();
    let pre_body = parse_pred("(and (le x 5) (ne x 0))").unwrap();
    assert!(check_loopd_triple(&m, &pre_body, &body, &inv, &states, &duals, &b).unwrap().passed());
    let c = parse_command("(while (lt x) (ne x 0) (prim dec:x))").unwrap();
    let post = parse_pred("(and (le x 5) (eq x 0))").unwrap();
    assert!(check_loopd_triple(&m, &inv, &c, &post, &states, &duals, &b).unwrap().passed());
}

#[test]
fn broken_backward_map_is_caught() {
    // [(dual x) ≥ 1] bad [(dual x) ≥ 1] holds for an identity γ; this γ adds one.
    let mut m = NatEnv::new();
    m.register(Primitive::new(
        "bad",
        |s: &Env| Ok(s.clone()),
        |_: &Env, t: &Env| Ok(with(t, "x", x_of(t) + 1)),
    ));
    let k = Contract {
        prim: "bad".into(),
        pre: parse_pred("(ge (dual x) 1)").unwrap(),
        post: parse_pred("(ge (dual x) 1)").unwrap(),
    };
    let states: Vec<Env> = (0..3).map(|x| Env::state(&[("x", x)])).collect();
    let duals: Vec<Env> = (0..3).map(|x| Env::dual(&[("x", x)])).collect();
    let reports = check_contracts(&m, &[k], &states, &duals, &TripleBudget::default()).unwrap();
    assert!(!reports[0].passed());
    assert!(reports[0].counterexample.is_some());
}

fn central_difference(m: &VecR, c: &Command, x: f64) -> f64 {
    let h = 1e-6;
    let at = |v: f64| run(m, c, m.parse_state(&format!("[{v}]")).unwrap(), m.parse_dual("[0.0]").unwrap(), FUEL).unwrap().0;
    (at(x + h).data[0] - at(x - h).data[0]) / (2.0 * h)
}

#[test]
fn gradients_match_differences_and_the_chain_rule() {
    let m = VecR::new(1);
    for (src, x, by_hand) in [
        ("(prim square)", 3.0, 6.0),
        ("(seq (prim add1) (prim square))", 1.0, 2.0 * (1.0 + 1.0)),
        ("skip", 2.0, 1.0),
    ] {
        let c = parse_command(src).unwrap();
        let g = gradient(&m, &c, &[x], &[1.0], FUEL).unwrap()[0];
        assert!((g - by_hand).abs() < 1e-12, "{src}: {g}");
        let fd = central_difference(&m, &c, x);
        assert!((g - fd).abs() <= 1e-5 * g.abs().max(1.0), "{src}: {g} vs {fd}");
    }
}
