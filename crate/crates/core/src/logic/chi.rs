//! Characteristic terms of quantifier-free formulas, with `0` for true.

use super::formula::{Formula, LogicError};
use crate::kernel::builtins::{add, monus, mul};
use crate::kernel::Term;

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicTerm {
    pub term: Term,
    pub source: Formula,
}

/// `χ_φ` with `χ_φ = 0 ↔ φ`.
pub fn characteristic_term(phi: &Formula) -> Result<CharacteristicTerm, LogicError> {
    Ok(CharacteristicTerm {
        term: chi(phi)?,
        source: phi.clone(),
    })
}

pub fn chi(phi: &Formula) -> Result<Term, LogicError> {
    Ok(match phi {
        Formula::Eq(t, s) => add(monus(t.clone(), s.clone()), monus(s.clone(), t.clone())),
        Formula::Top => Term::Zero,
        Formula::Bot => Term::numeral(1),
        Formula::And(a, b) => add(chi(a)?, chi(b)?),
        Formula::Or(a, b) => mul(chi(a)?, chi(b)?),
        Formula::Imp(a, b) => Term::ite(chi(a)?, chi(b)?, Term::Zero),
        Formula::OrT(t, a, b) => chi(&Formula::unfold_or_t(t, a, b))?,
        Formula::Forall(..) | Formula::Exists(..) => {
            return Err(LogicError::NotQuantifierFree(super::syntax::formula_to_string(phi)))
        }
    })
}
