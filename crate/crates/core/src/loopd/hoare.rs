//! Falsification checks for triples `[P] C [Q]`, read as
//! `∀s,t (P(s, C- s t) -> Q(C+ s, t))` with `P`, `Q` quantifier-free over a
//! state and a dual.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{run, Command, LoopError, Pred, StateModel};
use crate::check::{CheckReport, Counterexample, Method};

#[derive(Clone, Debug)]
pub struct TripleBudget {
    pub fuel: u64,
    /// Above this many `(s, t)` pairs, sample instead of enumerating.
    pub max_instances: usize,
    pub seed: u64,
}

impl Default for TripleBudget {
    fn default() -> Self {
        TripleBudget {
            fuel: 100_000,
            max_instances: 20_000,
            seed: 0,
        }
    }
}

/// The axiom contract `[pre] <c, γ> [post]` of one primitive.
#[derive(Clone, Debug)]
pub struct Contract {
    pub prim: String,
    pub pre: Pred,
    pub post: Pred,
}

fn arity(e: LoopError) -> LoopError {
    match e {
        LoopError::UnknownVariable(v) => LoopError::PredicateArity(v),
        e => e,
    }
}

pub fn check_loopd_triple<M: StateModel>(
    model: &M,
    pre: &Pred,
    c: &Command,
    post: &Pred,
    states: &[M::S],
    duals: &[M::T],
    budget: &TripleBudget,
) -> Result<CheckReport, LoopError> {
    let mut pairs: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|i| (0..duals.len()).map(move |j| (i, j)))
        .collect();
    let method = if pairs.len() > budget.max_instances {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        pairs.shuffle(&mut rng);
        pairs.truncate(budget.max_instances);
        Method::Sampled
    } else {
        Method::Exhaustive
    };
    let mut report = CheckReport {
        label: "loopd triple".to_string(),
        obligation: format!("[{pre}] {c} [{post}]"),
        method,
        instances: 0,
        counterexample: None,
    };
    for (i, j) in pairs {
        let (s, t) = (&states[i], &duals[j]);
        report.instances += 1;
        let failure = match run(model, c, s.clone(), t.clone(), budget.fuel) {
            Ok((s2, t2, _)) => {
                let before = pre.holds(model, s, Some(&t2)).map_err(arity)?;
                let after = post.holds(model, &s2, Some(t)).map_err(arity)?;
                (before && !after).then(|| format!("post fails at C+ s = {s2} with C- s t = {t2}"))
            }
            Err(e @ (LoopError::FuelExhausted | LoopError::DescentViolation { .. } | LoopError::Primitive { .. })) => {
                Some(e.to_string())
            }
            Err(e) => return Err(e),
        };
        if let Some(outcome) = failure {
            report.counterexample = Some(Counterexample {
                assignment: vec![("s".to_string(), s.to_string()), ("t".to_string(), t.to_string())],
                outcome,
            });
            break;
        }
    }
    Ok(report)
}

/// Checks each primitive against its contract.
pub fn check_contracts<M: StateModel>(
    model: &M,
    contracts: &[Contract],
    states: &[M::S],
    duals: &[M::T],
    budget: &TripleBudget,
) -> Result<Vec<CheckReport>, LoopError> {
    contracts
        .iter()
        .map(|k| {
            let c = Command::Prim(k.prim.clone());
            let mut r = check_loopd_triple(model, &k.pre, &c, &k.post, states, duals, budget)?;
            r.label = format!("contract {}", k.prim);
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopd::{parse_command, parse_pred, Env, NatEnv, Primitive};

    fn grid(max: u64, sort_dual: bool) -> Vec<Env> {
        let mut out = Vec::new();
        for x in 0..=max {
            for y in 0..=max {
                let pairs = [("x", x), ("y", y)];
                out.push(if sort_dual { Env::dual(&pairs) } else { Env::state(&pairs) });
            }
        }
        out
    }

    fn check(m: &NatEnv, p: &str, c: &str, q: &str) -> CheckReport {
        check_loopd_triple(
            m,
            &parse_pred(p).unwrap(),
            &parse_command(c).unwrap(),
            &parse_pred(q).unwrap(),
            &grid(4, false),
            &grid(4, true),
            &TripleBudget::default(),
        )
        .unwrap()
    }

    #[test]
    fn skip_preserves_any_predicate() {
        let r = check(&NatEnv::new(), "(le x (dual y))", "skip", "(le x (dual y))");
        assert!(r.passed());
        assert_eq!(r.instances, 625);
    }

    #[test]
    fn countdown_establishes_the_negated_guard() {
        let m = NatEnv::new();
        assert!(check(&m, "true", "(prim dec:x)", "true").passed());
        assert!(check(&m, "true", "(while (lt x) (ne x 0) (prim dec:x))", "(eq x 0)").passed());
    }

    #[test]
    fn a_wrong_backward_map_breaks_its_contract() {
        // The contract says the dual of x is passed back unchanged by inc.
        let contract = Contract {
            prim: "inc:x".into(),
            pre: parse_pred("(eq (dual x) 3)").unwrap(),
            post: parse_pred("(eq (dual x) 3)").unwrap(),
        };
        let mut m = NatEnv::new();
        let ok = check_contracts(&m, std::slice::from_ref(&contract), &grid(3, false), &grid(3, true), &TripleBudget::default());
        assert!(ok.unwrap()[0].passed());
        m.register(Primitive::new(
            "inc:x",
            |s: &Env| Ok(Env::state(&[("x", s.get("x")? + 1), ("y", s.get("y")?)])),
            |_: &Env, t: &Env| Ok(Env::dual(&[("x", 3), ("y", t.get("y")?)])),
        ));
        let bad = check_contracts(&m, &[contract], &grid(3, false), &grid(3, true), &TripleBudget::default());
        assert!(!bad.unwrap()[0].passed());
    }

    #[test]
    fn unknown_components_are_an_arity_error() {
        let e = check_loopd_triple(
            &NatEnv::new(),
            &parse_pred("(eq z 0)").unwrap(),
            &Command::Skip,
            &Pred::True,
            &grid(1, false),
            &grid(1, true),
            &TripleBudget::default(),
        );
        assert!(matches!(e, Err(LoopError::PredicateArity(_))));
    }
}
