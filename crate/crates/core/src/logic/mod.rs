//! Formulas, the Dialectica translation and characteristic terms.

pub mod chi;
pub mod formula;
pub mod interp;
pub mod syntax;

pub use chi::{characteristic_term, chi, CharacteristicTerm};
pub use formula::{Formula, LogicError};
pub use interp::{dialectica_matrix, matrix, signature, translate, Signature};
