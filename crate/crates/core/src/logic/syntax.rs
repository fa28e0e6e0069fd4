//! Surface syntax for formulas.
//!
//! ```text
//! formula ::= top | bot | (eq t s) | (and A B) | (or A B) | (orT t A B)
//!           | (imp A B) | (not A) | (forall (x type) ... A) | (exists (x type) ... A)
//! ```
//!
//! `(eq t s)` at an arrow type elaborates to its pointwise form. A document
//! may precede its formulas with `(var x type)` and `(const c type)`
//! declarations.

use std::sync::Arc;

use super::formula::Formula;
use super::interp::signature;
use crate::kernel::sexpr::{read_all, read_one, ParseError, Sexp};
use crate::kernel::syntax::{parse_binder, parse_type, term_to_string, Symbols, TermParser};
use crate::kernel::typing::infer_type;
use crate::kernel::types::display_seq;
use crate::kernel::{Constant, Name, Term, Type};

pub struct FormulaParser<'a> {
    terms: TermParser<'a>,
}

impl<'a> FormulaParser<'a> {
    pub fn new(symbols: &'a Symbols) -> Self {
        FormulaParser {
            terms: TermParser::new(symbols),
        }
    }

    pub fn with_locals(symbols: &'a Symbols, locals: Vec<(Name, Type)>) -> Self {
        let mut terms = TermParser::new(symbols);
        terms.locals = locals;
        FormulaParser { terms }
    }

    fn typed_term(&mut self, s: &Sexp) -> Result<(Term, Type), ParseError> {
        let t = self.terms.term(s)?;
        let mut ctx = self.terms.symbols.context();
        for (n, ty) in &self.terms.locals {
            ctx.insert(n.clone(), ty.clone());
        }
        let ty = infer_type(&t, &ctx).map_err(|e| ParseError::new(s.pos(), e.to_string()))?;
        Ok((t, ty))
    }

    fn nat_term(&mut self, s: &Sexp) -> Result<Term, ParseError> {
        let (t, ty) = self.typed_term(s)?;
        if !ty.is_nat() {
            return Err(ParseError::new(s.pos(), format!("expected a nat term, found type {ty}")));
        }
        Ok(t)
    }

    pub fn formula(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        match s {
            Sexp::Atom(a, p) => match a.as_str() {
                "top" => Ok(Formula::Top),
                "bot" => Ok(Formula::Bot),
                _ => Err(ParseError::new(*p, format!("unknown formula {a}"))),
            },
            Sexp::List(items, p) => {
                let head = s
                    .head()
                    .ok_or_else(|| ParseError::new(*p, "expected a formula form"))?;
                let args = &items[1..];
                let arity = |n: usize| {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(ParseError::new(*p, format!("{head} takes {n} arguments")))
                    }
                };
                match head {
                    "eq" => {
                        arity(2)?;
                        let (t, ty) = self.typed_term(&args[0])?;
                        let (u, uy) = self.typed_term(&args[1])?;
                        if ty != uy {
                            return Err(ParseError::new(
                                *p,
                                format!("equality between types {ty} and {uy}"),
                            ));
                        }
                        let (_, res) = ty.uncurry();
                        if !res.is_nat() {
                            return Err(ParseError::new(
                                *p,
                                format!("equality at {ty} needs a registered decider"),
                            ));
                        }
                        Ok(Formula::eq_at(t, u, &ty))
                    }
                    "and" | "or" | "imp" => {
                        arity(2)?;
                        let a = self.formula(&args[0])?;
                        let b = self.formula(&args[1])?;
                        Ok(match head {
                            "and" => Formula::and(a, b),
                            "or" => Formula::or(a, b),
                            _ => Formula::imp(a, b),
                        })
                    }
                    "not" => {
                        arity(1)?;
                        Ok(Formula::not(self.formula(&args[0])?))
                    }
                    "orT" => {
                        arity(3)?;
                        let t = self.nat_term(&args[0])?;
                        let a = self.formula(&args[1])?;
                        let b = self.formula(&args[2])?;
                        Ok(Formula::or_t(t, a, b))
                    }
                    "forall" | "exists" => {
                        if args.len() < 2 {
                            return Err(ParseError::new(*p, format!("{head} needs binders and a body")));
                        }
                        let (binders, body) = args.split_at(args.len() - 1);
                        let binders = binders
                            .iter()
                            .map(parse_binder)
                            .collect::<Result<Vec<_>, _>>()?;
                        let depth = self.terms.locals.len();
                        self.terms.locals.extend(binders.iter().cloned());
                        let b = self.formula(&body[0]);
                        self.terms.locals.truncate(depth);
                        let b = b?;
                        Ok(if head == "forall" {
                            Formula::forall_many(&binders, b)
                        } else {
                            Formula::exists_many(&binders, b)
                        })
                    }
                    other => Err(ParseError::new(*p, format!("unknown formula form {other}"))),
                }
            }
        }
    }
}

pub fn parse_formula(src: &str, symbols: &Symbols) -> Result<Formula, ParseError> {
    FormulaParser::new(symbols).formula(&read_one(src)?)
}

/// Handles a `(var x T)` or `(const c T)` declaration; returns false for
/// anything else.
pub fn declaration(s: &Sexp, symbols: &mut Symbols) -> Result<bool, ParseError> {
    match s.head() {
        Some("var") | Some("const") => {
            let items = s.list().unwrap_or_default();
            if items.len() != 3 {
                return Err(ParseError::new(s.pos(), "declaration must be (var|const name type)"));
            }
            let n = items[1].expect_atom("declared name")?;
            let ty = parse_type(&items[2])?;
            if s.head() == Some("var") {
                symbols.declare(n, ty);
            } else {
                symbols.add_const(Arc::new(Constant::new(n, ty)));
            }
            Ok(true)
        }
        _ => Ok(false),
    }
}

/// A formula file: declarations followed by one or more formulas.
pub fn parse_formula_document(
    src: &str,
    symbols: &mut Symbols,
) -> Result<Vec<Formula>, ParseError> {
    let mut out = Vec::new();
    for s in read_all(src)? {
        if declaration(&s, symbols)? {
            continue;
        }
        out.push(FormulaParser::new(symbols).formula(&s)?);
    }
    Ok(out)
}

pub fn formula_to_string(p: &Formula) -> String {
    let mut out = String::new();
    write_formula(p, &mut out);
    out
}

fn write_formula(p: &Formula, out: &mut String) {
    match p {
        Formula::Top => out.push_str("top"),
        Formula::Bot => out.push_str("bot"),
        Formula::Eq(t, s) => {
            out.push_str(&format!("(eq {} {})", term_to_string(t), term_to_string(s)));
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            out.push_str(if matches!(p, Formula::And(..)) { "(and " } else { "(or " });
            write_formula(a, out);
            out.push(' ');
            write_formula(b, out);
            out.push(')');
        }
        Formula::Imp(a, b) if **b == Formula::Bot => {
            out.push_str("(not ");
            write_formula(a, out);
            out.push(')');
        }
        Formula::Imp(a, b) => {
            out.push_str("(imp ");
            write_formula(a, out);
            out.push(' ');
            write_formula(b, out);
            out.push(')');
        }
        Formula::OrT(t, a, b) => {
            out.push_str(&format!("(orT {} ", term_to_string(t)));
            write_formula(a, out);
            out.push(' ');
            write_formula(b, out);
            out.push(')');
        }
        Formula::Forall(..) | Formula::Exists(..) => {
            let forall = matches!(p, Formula::Forall(..));
            out.push_str(if forall { "(forall" } else { "(exists" });
            let mut cur = p;
            loop {
                match cur {
                    Formula::Forall(x, ty, b) if forall => {
                        out.push_str(&format!(" ({x} {ty})"));
                        cur = b;
                    }
                    Formula::Exists(x, ty, b) if !forall => {
                        out.push_str(&format!(" ({x} {ty})"));
                        cur = b;
                    }
                    _ => break,
                }
            }
            out.push(' ');
            write_formula(cur, out);
            out.push(')');
        }
    }
}

/// The formula preceded by its signature as comment lines.
pub fn formula_with_header(p: &Formula) -> String {
    let sig = signature(p);
    format!(
        "; witnesses {}\n; counters {}\n{}",
        display_seq(&sig.witnesses),
        display_seq(&sig.counters),
        formula_to_string(p)
    )
}
