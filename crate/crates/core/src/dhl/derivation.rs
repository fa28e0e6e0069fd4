//! Derivation trees and realizer synthesis by bottom-up rule application.

use serde::Serialize;

use super::rules::{apply_rule, Params, RuleId, Session};
use super::{DhlError, Triple};
use crate::check::{CheckReport, Generator};
use crate::kernel::{Name, Term, TypeSeq};

#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule: RuleId,
    pub params: Params,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn new(rule: RuleId, params: Params, premises: Vec<Derivation>) -> Derivation {
        Derivation { rule, params, premises }
    }

    pub fn leaf(rule: RuleId, params: Params) -> Derivation {
        Derivation::new(rule, params, Vec::new())
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideConditionKind {
    Freshness,
    Descent,
    DImplies,
    TermEquality,
    UniversalAxiom,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "report", rename_all = "kebab-case")]
pub enum Status {
    Syntactic,
    PropertyTested(CheckReport),
    Assumed,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Syntactic => "syntactic",
            Status::PropertyTested(_) => "property-tested",
            Status::Assumed => "assumed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SideCondition {
    pub kind: SideConditionKind,
    pub description: String,
    pub status: Status,
    /// Position of the rule instance in the derivation, e.g. `cons/0/while`.
    pub path: String,
}

impl SideCondition {
    pub fn new(kind: SideConditionKind, description: String, status: Status) -> SideCondition {
        SideCondition {
            kind,
            description,
            status,
            path: String::new(),
        }
    }
}

/// Constants introduced by the epsilon rules and the realizer terms they
/// stand for.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonBinding {
    pub name: String,
    pub names: Vec<Name>,
    pub types: TypeSeq,
    pub value: Vec<Term>,
}

pub struct Synthesis {
    /// The root conclusion as built, epsilon constants unresolved.
    pub conclusion: Triple,
    /// Epsilons substituted back and stray realizer variables closed.
    pub resolved: Triple,
    pub side_conditions: Vec<SideCondition>,
    pub epsilons: Vec<EpsilonBinding>,
}

impl Synthesis {
    pub fn any_assumed(&self) -> bool {
        self.side_conditions.iter().any(|s| s.status == Status::Assumed)
    }
}

/// Applies every rule bottom-up. Errors carry the path of the failing rule.
pub fn synthesize(d: &Derivation, gen: Generator) -> Result<Synthesis, DhlError> {
    let mut session = Session::new(gen);
    let mut side = Vec::new();
    let conclusion = walk(d, d.rule.name().to_string(), &mut session, &mut side)?;
    let resolved = conclusion.resolve(&session.epsilons).closed();
    Ok(Synthesis {
        conclusion,
        resolved,
        side_conditions: side,
        epsilons: session.epsilons,
    })
}

fn walk(
    d: &Derivation,
    path: String,
    session: &mut Session,
    side: &mut Vec<SideCondition>,
) -> Result<Triple, DhlError> {
    let mut premises = Vec::with_capacity(d.premises.len());
    for (i, p) in d.premises.iter().enumerate() {
        premises.push(walk(p, format!("{path}/{i}:{}", p.rule), session, side)?);
    }
    let applied = apply_rule(d.rule, &premises, &d.params, session).map_err(|e| match e {
        e @ DhlError::At { .. } => e,
        e => DhlError::At {
            path: path.clone(),
            source: Box::new(e),
        },
    })?;
    side.extend(applied.side_conditions.into_iter().map(|mut s| {
        s.path = path.clone();
        s
    }));
    Ok(applied.conclusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Budget;
    use crate::kernel::Type;
    use crate::logic::Formula;

    #[test]
    fn errors_name_the_failing_node() {
        let p = Formula::exists("x", Type::Nat, Formula::eq(Term::var("x", Type::Nat), Term::Zero));
        let leaf = Derivation::leaf(RuleId::AxId, Params { pre: Some(p), ..Params::default() });
        let bad = Derivation::new(RuleId::AndR, Params::default(), vec![leaf]);
        let err = synthesize(&bad, Generator::new(Budget::default())).err().unwrap();
        match err {
            DhlError::At { path, .. } => assert_eq!(path, "and-r"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn epsilon_right_binds_the_witness() {
        // {⊤} <3 | -> {∃x x=3}  becomes  {⊤} <- | -> {eps1 = 3}
        let given = Derivation::leaf(
            RuleId::AxUniversal,
            Params {
                pre: Some(Formula::Top),
                post: Some(Formula::eq(Term::numeral(3), Term::numeral(3))),
                ..Params::default()
            },
        );
        let ex = Derivation::new(
            RuleId::ExistsR,
            Params {
                binders: vec![("x".into(), Type::Nat)],
                body: Some(Formula::eq(Term::var("x", Type::Nat), Term::numeral(3))),
                terms: vec![Term::numeral(3)],
                ..Params::default()
            },
            vec![given],
        );
        let eps = Derivation::new(RuleId::EpsilonR, Params::default(), vec![ex]);
        let s = synthesize(&eps, Generator::new(Budget::default())).unwrap();
        assert_eq!(s.epsilons.len(), 1);
        assert_eq!(s.epsilons[0].value, vec![Term::numeral(3)]);
        assert!(s.conclusion.forward.is_empty());
        assert!(crate::dhl::same_formula(
            &s.resolved.post,
            &Formula::eq(Term::numeral(3), Term::numeral(3))
        ));
    }
}
