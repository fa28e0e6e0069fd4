//! System T terms: types, syntax, substitution, typing and evaluation.

pub mod builtins;
pub mod eval;
pub mod normalize;
pub mod operators;
pub mod seq;
pub mod sexpr;
pub mod subst;
pub mod syntax;
pub mod term;
pub mod types;
pub mod typing;

pub use term::{name, Constant, Datum, Name, Opaque, OpaqueData, Relation, Term, TermSeq};
pub use types::{Type, TypeSeq};
