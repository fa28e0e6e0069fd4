//! Surface syntax for types and terms.
//!
//! ```text
//! type ::= nat | <Sort> | (-> type type ...)
//! term ::= <numeral> | <var> | <const>
//!        | (lam (x type) ... body) | (app f a ...) | (suc t)
//!        | (rec type) | (rec j type ...) | (ite b s t)
//!        | (whilerec rel guard (step ...) (type ...) j)
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use super::builtins;
use super::sexpr::{read_one, ParseError, Sexp};
use super::term::{name, Constant, Name, Relation, Term};
use super::typing::{infer_type, Context};
use super::types::Type;

/// Names visible to the parser: declared free variables, constants and
/// relations. Builtin arithmetic and `lt` are always available.
#[derive(Clone, Default)]
pub struct Symbols {
    pub vars: BTreeMap<Name, Type>,
    pub consts: BTreeMap<Name, Arc<Constant>>,
    pub relations: BTreeMap<Name, Arc<Relation>>,
}

impl Symbols {
    pub fn new() -> Symbols {
        let mut s = Symbols::default();
        s.add_relation(builtins::nat_lt());
        s
    }

    pub fn declare(&mut self, n: &str, ty: Type) {
        self.vars.insert(name(n), ty);
    }

    pub fn add_const(&mut self, c: Arc<Constant>) {
        self.consts.insert(c.name.clone(), c);
    }

    pub fn add_relation(&mut self, r: Arc<Relation>) {
        self.relations.insert(r.name.clone(), r);
    }

    pub fn constant(&self, n: &str) -> Option<Arc<Constant>> {
        self.consts.get(n).cloned().or_else(|| builtins::lookup(n))
    }

    pub fn relation(&self, n: &str) -> Option<Arc<Relation>> {
        self.relations.get(n).cloned()
    }

    pub fn context(&self) -> Context {
        self.vars.clone()
    }
}

pub fn parse_type(s: &Sexp) -> Result<Type, ParseError> {
    match s {
        Sexp::Atom(a, p) => {
            if a == "nat" {
                Ok(Type::Nat)
            } else if a.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                Ok(Type::sort(a))
            } else {
                Err(ParseError::new(*p, format!("unknown type {a}")))
            }
        }
        Sexp::List(items, p) => {
            if s.head() != Some("->") || items.len() < 3 {
                return Err(ParseError::new(*p, "expected (-> A B ...)"));
            }
            let parts = items[1..]
                .iter()
                .map(parse_type)
                .collect::<Result<Vec<_>, _>>()?;
            let (last, init) = parts.split_last().unwrap();
            Ok(Type::arrows(init, last.clone()))
        }
    }
}

pub fn parse_type_str(src: &str) -> Result<Type, ParseError> {
    parse_type(&read_one(src)?)
}

/// A typed binder `(x T)`.
pub fn parse_binder(s: &Sexp) -> Result<(Name, Type), ParseError> {
    let items = s.expect_list("binder (x type)")?;
    if items.len() != 2 {
        return Err(ParseError::new(s.pos(), "binder must be (x type)"));
    }
    let n = items[0].expect_atom("binder name")?;
    Ok((name(n), parse_type(&items[1])?))
}

pub struct TermParser<'a> {
    pub symbols: &'a Symbols,
    pub locals: Vec<(Name, Type)>,
}

impl<'a> TermParser<'a> {
    pub fn new(symbols: &'a Symbols) -> Self {
        TermParser {
            symbols,
            locals: Vec::new(),
        }
    }

    fn var_type(&self, n: &str) -> Option<Type> {
        self.locals
            .iter()
            .rev()
            .find(|(x, _)| x.as_ref() == n)
            .map(|(_, t)| t.clone())
            .or_else(|| self.symbols.vars.get(n).cloned())
    }

    pub fn term(&mut self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Atom(a, p) => {
                if let Ok(n) = a.parse::<u64>() {
                    return Ok(Term::numeral(n));
                }
                if let Some(ty) = self.var_type(a) {
                    return Ok(Term::var(a, ty));
                }
                if let Some(c) = self.symbols.constant(a) {
                    return Ok(Term::Const(c));
                }
                Err(ParseError::new(*p, format!("unknown identifier {a}")))
            }
            Sexp::List(items, p) => {
                let head = s
                    .head()
                    .ok_or_else(|| ParseError::new(*p, "expected a term form"))?;
                let args = &items[1..];
                match head {
                    "lam" => {
                        if args.len() < 2 {
                            return Err(ParseError::new(*p, "lam needs a binder and a body"));
                        }
                        let (binders, body) = args.split_at(args.len() - 1);
                        let binders = binders
                            .iter()
                            .map(parse_binder)
                            .collect::<Result<Vec<_>, _>>()?;
                        let depth = self.locals.len();
                        self.locals.extend(binders.iter().cloned());
                        let b = self.term(&body[0]);
                        self.locals.truncate(depth);
                        let mut out = b?;
                        for (x, ty) in binders.into_iter().rev() {
                            out = Term::Lam(x, ty, Box::new(out));
                        }
                        Ok(out)
                    }
                    "app" => {
                        if args.len() < 2 {
                            return Err(ParseError::new(*p, "app needs a function and arguments"));
                        }
                        let f = self.term(&args[0])?;
                        let rest = args[1..]
                            .iter()
                            .map(|a| self.term(a))
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(Term::apps(f, rest))
                    }
                    "suc" => {
                        if args.len() != 1 {
                            return Err(ParseError::new(*p, "suc takes one argument"));
                        }
                        Ok(Term::suc(self.term(&args[0])?))
                    }
                    "rec" => {
                        let (component, types) = match args.first().and_then(Sexp::atom) {
                            Some(a) if a.parse::<usize>().is_ok() => {
                                (a.parse::<usize>().unwrap(), &args[1..])
                            }
                            _ => (0, args),
                        };
                        let carrier = types.iter().map(parse_type).collect::<Result<Vec<_>, _>>()?;
                        if component >= carrier.len() {
                            return Err(ParseError::new(*p, "rec component out of range"));
                        }
                        Ok(Term::Rec { carrier, component })
                    }
                    "ite" => {
                        if args.len() != 3 {
                            return Err(ParseError::new(*p, "ite takes (ite b s t)"));
                        }
                        Ok(Term::ite(
                            self.term(&args[0])?,
                            self.term(&args[1])?,
                            self.term(&args[2])?,
                        ))
                    }
                    "whilerec" => {
                        if args.len() != 5 {
                            return Err(ParseError::new(
                                *p,
                                "whilerec takes (whilerec rel guard (step ...) (type ...) j)",
                            ));
                        }
                        let rname = args[0].expect_atom("relation name")?;
                        let relation = self.symbols.relation(rname).ok_or_else(|| {
                            ParseError::new(args[0].pos(), format!("unknown relation {rname}"))
                        })?;
                        let guard = self.term(&args[1])?;
                        let step = args[2]
                            .expect_list("step list")?
                            .iter()
                            .map(|a| self.term(a))
                            .collect::<Result<Vec<_>, _>>()?;
                        let result = args[3]
                            .expect_list("result types")?
                            .iter()
                            .map(parse_type)
                            .collect::<Result<Vec<_>, _>>()?;
                        let component: usize = args[4]
                            .expect_atom("component index")?
                            .parse()
                            .map_err(|_| ParseError::new(args[4].pos(), "bad component index"))?;
                        if component >= result.len() {
                            return Err(ParseError::new(*p, "whilerec component out of range"));
                        }
                        Ok(Term::WhileRec {
                            relation,
                            guard: Box::new(guard),
                            step,
                            result,
                            component,
                        })
                    }
                    other => Err(ParseError::new(*p, format!("unknown term form {other}"))),
                }
            }
        }
    }
}

/// Parses and type-checks a term against the declared variables.
pub fn parse_term(src: &str, symbols: &Symbols) -> Result<Term, ParseError> {
    let s = read_one(src)?;
    let t = TermParser::new(symbols).term(&s)?;
    infer_type(&t, &symbols.context()).map_err(|e| ParseError::new(s.pos(), e.to_string()))?;
    Ok(t)
}

pub fn term_to_string(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_term(t: &Term, out: &mut String) {
    if let Some(n) = t.as_numeral() {
        out.push_str(&n.to_string());
        return;
    }
    match t {
        Term::Var(n, _) => out.push_str(n),
        Term::Lam(..) => {
            out.push_str("(lam");
            let mut cur = t;
            while let Term::Lam(x, ty, b) = cur {
                out.push_str(&format!(" ({x} {ty})"));
                cur = b;
            }
            out.push(' ');
            write_term(cur, out);
            out.push(')');
        }
        Term::App(..) => {
            let (head, args) = t.spine();
            out.push_str("(app ");
            write_term(head, out);
            for a in args {
                out.push(' ');
                write_term(a, out);
            }
            out.push(')');
        }
        Term::Zero => out.push('0'),
        Term::Suc(a) => {
            out.push_str("(suc ");
            write_term(a, out);
            out.push(')');
        }
        Term::Rec { carrier, component } => {
            if carrier.len() == 1 && *component == 0 {
                out.push_str(&format!("(rec {})", carrier[0]));
            } else {
                out.push_str(&format!("(rec {component}"));
                for c in carrier {
                    out.push_str(&format!(" {c}"));
                }
                out.push(')');
            }
        }
        Term::Ite(b, s, e) => {
            out.push_str("(ite ");
            write_term(b, out);
            out.push(' ');
            write_term(s, out);
            out.push(' ');
            write_term(e, out);
            out.push(')');
        }
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => {
            out.push_str(&format!("(whilerec {} ", relation.name));
            write_term(guard, out);
            out.push_str(" (");
            for (i, s) in step.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_term(s, out);
            }
            out.push_str(") (");
            let tys: Vec<String> = result.iter().map(|t| t.to_string()).collect();
            out.push_str(&tys.join(" "));
            out.push_str(&format!(") {component})"));
        }
        Term::Const(c) => out.push_str(&c.name),
        Term::Opaque(o) => out.push_str(&format!("#<{o}>")),
    }
}

pub fn seq_to_string(ts: &[Term]) -> String {
    if ts.is_empty() {
        return "-".to_string();
    }
    let parts: Vec<String> = ts.iter().map(term_to_string).collect();
    parts.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(src: &str, symbols: &Symbols) {
        let t = parse_term(src, symbols).unwrap();
        assert_eq!(term_to_string(&t), src);
        assert_eq!(parse_term(&term_to_string(&t), symbols).unwrap(), t);
    }

    #[test]
    fn printer_roundtrips() {
        let mut s = Symbols::new();
        s.declare("f", Type::arrow(Type::Nat, Type::Nat));
        roundtrip("(lam (x nat) (y nat) (app f (suc (app add x y))))", &s);
        roundtrip("(app (rec nat) (lam (k nat) (r nat) (suc r)) 0 3)", &s);
        roundtrip("(rec 1 nat (-> nat nat))", &s);
        roundtrip("(ite 0 1 2)", &Symbols::new());
    }

    #[test]
    fn whilerec_roundtrips() {
        let s = Symbols::new();
        roundtrip(
            "(whilerec lt (lam (x nat) (ite x 1 0)) ((lam (x nat) (app pred x))) (nat) 0)",
            &s,
        );
    }

    #[test]
    fn ill_typed_input_reports_position() {
        let err = parse_term("(suc (lam (x nat) x))", &Symbols::new()).unwrap_err();
        assert_eq!(err.pos.line, 1);
        assert!(err.msg.contains("type mismatch"));
    }
}
