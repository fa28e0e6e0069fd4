//! S-expression derivation scripts.
//!
//! ```text
//! (var g (-> nat nat))
//! (relation below (carrier nat) (decider (lam (y nat) (x nat) (app monus (suc y) x))))
//! (rule cons (params (pre F) (post F))
//!   (premises (rule ax-id (params (pre F)))))
//! ```
//!
//! Declarations come first; the last form is the root derivation.

use std::sync::Arc;

use super::{Derivation, Params, RuleId};
use crate::kernel::builtins::nat_lt;
use crate::kernel::sexpr::{read_all, ParseError, Pos, Sexp};
use crate::kernel::syntax::{parse_binder, parse_type, term_to_string, Symbols, TermParser};
use crate::kernel::typing::infer_type;
use crate::kernel::{Name, Relation, Term, Type};
use crate::logic::syntax::{declaration, formula_to_string, FormulaParser};
use crate::logic::Formula;

pub struct Script {
    pub symbols: Symbols,
    pub root: Derivation,
}

pub fn parse_script(src: &str) -> Result<Script, ParseError> {
    parse_script_with(src, Symbols::new())
}

/// Parses a script on top of already registered symbols.
pub fn parse_script_with(src: &str, mut symbols: Symbols) -> Result<Script, ParseError> {
    let forms = read_all(src)?;
    let Some((last, decls)) = forms.split_last() else {
        return Err(ParseError::new(Pos { line: 1, col: 1 }, "empty script"));
    };
    for d in decls {
        if declaration(d, &mut symbols)? {
            continue;
        }
        if d.head() == Some("relation") {
            let r = relation(d, &symbols)?;
            symbols.add_relation(Arc::new(r));
            continue;
        }
        return Err(ParseError::new(d.pos(), "expected a declaration before the root rule"));
    }
    let root = derivation(last, &symbols)?;
    Ok(Script { symbols, root })
}

/// Reads `(relation name (carrier T ...) (decider term) (measure term))`.
pub fn relation(s: &Sexp, symbols: &Symbols) -> Result<Relation, ParseError> {
    let items = s.expect_list("relation")?;
    let name = items
        .get(1)
        .ok_or_else(|| ParseError::new(s.pos(), "relation needs a name"))?
        .expect_atom("relation name")?;
    let mut carrier = None;
    let mut decider = None;
    let mut measure = None;
    for item in &items[2..] {
        let parts = item.expect_list("relation field")?;
        match item.head() {
            Some("carrier") => {
                carrier = Some(parts[1..].iter().map(parse_type).collect::<Result<Vec<_>, _>>()?)
            }
            Some("decider") | Some("measure") => {
                let body = parts
                    .get(1)
                    .ok_or_else(|| ParseError::new(item.pos(), "missing term"))?;
                let t = TermParser::new(symbols).term(body)?;
                if item.head() == Some("decider") {
                    decider = Some(t);
                } else {
                    measure = Some(t);
                }
            }
            _ => return Err(ParseError::new(item.pos(), "expected carrier, decider or measure")),
        }
    }
    let carrier = carrier.ok_or_else(|| ParseError::new(s.pos(), "relation needs a carrier"))?;
    let decider = decider.ok_or_else(|| ParseError::new(s.pos(), "relation needs a decider"))?;
    let both: Vec<Type> = carrier.iter().chain(&carrier).cloned().collect();
    let want = Type::arrows(&both, Type::Nat);
    let found = infer_type(&decider, &symbols.context()).map_err(|e| ParseError::new(s.pos(), e.to_string()))?;
    if found != want {
        return Err(ParseError::new(s.pos(), format!("decider has type {found}, expected {want}")));
    }
    Ok(Relation {
        name: name.into(),
        carrier,
        decider,
        measure,
    })
}

fn derivation(s: &Sexp, symbols: &Symbols) -> Result<Derivation, ParseError> {
    let items = s.expect_list("rule")?;
    if s.head() != Some("rule") || items.len() < 2 {
        return Err(ParseError::new(s.pos(), "expected (rule <id> ...)"));
    }
    let id = items[1].expect_atom("rule id")?;
    let rule = RuleId::parse(id).ok_or_else(|| ParseError::new(items[1].pos(), format!("unknown rule {id}")))?;
    let mut params = Params::default();
    let mut premises = Vec::new();
    for item in &items[2..] {
        match item.head() {
            Some("params") => params = parse_params(item, symbols)?,
            Some("premises") => {
                for p in &item.expect_list("premises")?[1..] {
                    premises.push(derivation(p, symbols)?);
                }
            }
            _ => return Err(ParseError::new(item.pos(), "expected (params ...) or (premises ...)")),
        }
    }
    Ok(Derivation::new(rule, params, premises))
}

fn parse_params(s: &Sexp, symbols: &Symbols) -> Result<Params, ParseError> {
    let entries = &s.expect_list("params")?[1..];
    let mut p = Params::default();
    // Binders scope over body and phi, wherever they appear.
    for e in entries {
        if e.head() == Some("binders") {
            for b in &e.expect_list("binders")?[1..] {
                p.binders.push(parse_binder(b)?);
            }
        }
    }
    for e in entries {
        let parts = e.expect_list("parameter")?;
        let one = || {
            parts
                .get(1)
                .ok_or_else(|| ParseError::new(e.pos(), "parameter needs a value"))
        };
        let formula = |locals: Vec<(Name, Type)>| -> Result<Formula, ParseError> {
            FormulaParser::with_locals(symbols, locals).formula(one()?)
        };
        let terms = || -> Result<Vec<Term>, ParseError> {
            let mut tp = TermParser::new(symbols);
            parts[1..].iter().map(|t| tp.term(t)).collect()
        };
        match e.head() {
            Some("pre") => p.pre = Some(formula(vec![])?),
            Some("post") => p.post = Some(formula(vec![])?),
            Some("other") => p.other = Some(formula(vec![])?),
            Some("phi") => p.phi = Some(formula(p.binders.clone())?),
            Some("body") => p.body = Some(formula(p.binders.clone())?),
            Some("binders") => {}
            Some("terms") => p.terms = terms()?,
            Some("forward") => p.forward = terms()?,
            Some("backward") => p.backward = terms()?,
            Some("relation") => {
                let n = one()?.expect_atom("relation name")?;
                p.relation = Some(
                    symbols
                        .relation(n)
                        .ok_or_else(|| ParseError::new(e.pos(), format!("unknown relation {n}")))?,
                );
            }
            Some("count") => {
                let n = one()?.expect_atom("count")?;
                p.count = Some(n.parse().map_err(|_| ParseError::new(e.pos(), "count must be a number"))?);
            }
            Some("assume") => p.assume = true,
            _ => return Err(ParseError::new(e.pos(), "unknown parameter")),
        }
    }
    Ok(p)
}

/// Prints declarations and the derivation; `parse_script` reads it back.
pub fn script_to_string(script: &Script) -> String {
    let mut out = String::new();
    for (n, ty) in &script.symbols.vars {
        out.push_str(&format!("(var {n} {ty})\n"));
    }
    for (n, c) in &script.symbols.consts {
        if c.implementation().is_none() {
            out.push_str(&format!("(const {n} {})\n", c.ty));
        }
    }
    let builtin = nat_lt();
    for r in script.symbols.relations.values() {
        if Arc::ptr_eq(r, &builtin) {
            continue;
        }
        out.push_str(&format!("(relation {} (carrier", r.name));
        for t in &r.carrier {
            out.push_str(&format!(" {t}"));
        }
        out.push_str(&format!(") (decider {})", term_to_string(&r.decider)));
        if let Some(m) = &r.measure {
            out.push_str(&format!(" (measure {})", term_to_string(m)));
        }
        out.push_str(")\n");
    }
    write_derivation(&script.root, 0, &mut out);
    out.push('\n');
    out
}

fn write_derivation(d: &Derivation, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    out.push_str(&format!("{pad}(rule {}", d.rule));
    let params = params_to_string(&d.params);
    if !params.is_empty() {
        out.push_str(&format!("\n{pad}  (params{params})"));
    }
    if !d.premises.is_empty() {
        out.push_str(&format!("\n{pad}  (premises"));
        for p in &d.premises {
            out.push('\n');
            write_derivation(p, depth + 2, out);
        }
        out.push(')');
    }
    out.push(')');
}

fn params_to_string(p: &Params) -> String {
    let mut out = String::new();
    if !p.binders.is_empty() {
        out.push_str(" (binders");
        for (n, t) in &p.binders {
            out.push_str(&format!(" ({n} {t})"));
        }
        out.push(')');
    }
    for (key, f) in [
        ("pre", &p.pre),
        ("post", &p.post),
        ("other", &p.other),
        ("phi", &p.phi),
        ("body", &p.body),
    ] {
        if let Some(f) = f {
            out.push_str(&format!(" ({key} {})", formula_to_string(f)));
        }
    }
    for (key, ts) in [("terms", &p.terms), ("forward", &p.forward), ("backward", &p.backward)] {
        if !ts.is_empty() {
            out.push_str(&format!(" ({key}"));
            for t in ts {
                out.push_str(&format!(" {}", term_to_string(t)));
            }
            out.push(')');
        }
    }
    if let Some(r) = &p.relation {
        out.push_str(&format!(" (relation {})", r.name));
    }
    if let Some(n) = p.count {
        out.push_str(&format!(" (count {n})"));
    }
    if p.assume {
        out.push_str(" (assume)");
    }
    out
}
