use std::collections::BTreeMap;

use thiserror::Error;

use super::term::{Name, Term};
use super::types::{display_seq, seq_arrow, Type};

pub type Context = BTreeMap<Name, Type>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypeError {
    #[error("unbound variable {name} at {path}")]
    UnboundVariable { name: Name, path: String },
    #[error("type mismatch at {path}: expected {expected}, found {found}")]
    TypeMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("malformed term at {path}: {reason}")]
    Malformed { path: String, reason: String },
}

/// Syntax-directed type inference. Variables carry their own annotation; when
/// the context also binds them the two must agree.
pub fn infer_type(t: &Term, ctx: &Context) -> Result<Type, TypeError> {
    let mut path = Vec::new();
    let mut ctx = ctx.clone();
    infer(t, &mut ctx, &mut path)
}

/// Type of a term whose free variables are trusted to carry correct
/// annotations.
pub fn type_of(t: &Term) -> Result<Type, TypeError> {
    let ctx = super::subst::free_vars(t);
    infer_type(t, &ctx)
}

pub fn rec_type(carrier: &[Type], component: usize) -> Type {
    let mut domain = seq_arrow(&[&[Type::Nat][..], carrier].concat(), carrier);
    domain.extend(carrier.iter().cloned());
    domain.push(Type::Nat);
    Type::arrows(&domain, carrier[component].clone())
}

pub fn while_type(carrier: &[Type], result: &[Type], component: usize) -> Type {
    let mut domain = seq_arrow(carrier, result);
    domain.extend(seq_arrow(&[carrier, result].concat(), result));
    domain.extend(carrier.iter().cloned());
    Type::arrows(&domain, result[component].clone())
}

fn here(path: &[&'static str]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.join("/")
    }
}

fn expect(found: &Type, expected: &Type, path: &[&'static str]) -> Result<(), TypeError> {
    if found == expected {
        Ok(())
    } else {
        Err(TypeError::TypeMismatch {
            path: here(path),
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

fn infer(t: &Term, ctx: &mut Context, path: &mut Vec<&'static str>) -> Result<Type, TypeError> {
    match t {
        Term::Var(n, ty) => match ctx.get(n) {
            Some(bound) => {
                expect(ty, bound, path)?;
                Ok(ty.clone())
            }
            None => Err(TypeError::UnboundVariable {
                name: n.clone(),
                path: here(path),
            }),
        },
        Term::Lam(x, ty, body) => {
            let saved = ctx.insert(x.clone(), ty.clone());
            path.push("body");
            let r = infer(body, ctx, path);
            path.pop();
            match saved {
                Some(old) => ctx.insert(x.clone(), old),
                None => ctx.remove(x),
            };
            Ok(Type::arrow(ty.clone(), r?))
        }
        Term::App(f, a) => {
            path.push("fun");
            let tf = infer(f, ctx, path)?;
            path.pop();
            path.push("arg");
            let ta = infer(a, ctx, path)?;
            path.pop();
            match tf {
                Type::Arrow(d, c) => {
                    path.push("arg");
                    expect(&ta, &d, path)?;
                    path.pop();
                    Ok(*c)
                }
                other => Err(TypeError::TypeMismatch {
                    path: here(path),
                    expected: format!("(-> {ta} _)"),
                    found: other.to_string(),
                }),
            }
        }
        Term::Zero => Ok(Type::Nat),
        Term::Suc(a) => {
            path.push("suc");
            let ta = infer(a, ctx, path)?;
            expect(&ta, &Type::Nat, path)?;
            path.pop();
            Ok(Type::Nat)
        }
        Term::Rec { carrier, component } => {
            if *component >= carrier.len() {
                return Err(TypeError::Malformed {
                    path: here(path),
                    reason: format!("rec component {component} outside {}", display_seq(carrier)),
                });
            }
            Ok(rec_type(carrier, *component))
        }
        Term::Ite(b, s, e) => {
            path.push("cond");
            let tb = infer(b, ctx, path)?;
            expect(&tb, &Type::Nat, path)?;
            path.pop();
            path.push("then");
            let ts = infer(s, ctx, path)?;
            path.pop();
            path.push("else");
            let te = infer(e, ctx, path)?;
            expect(&te, &ts, path)?;
            path.pop();
            Ok(ts)
        }
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => {
            let carrier = &relation.carrier;
            if *component >= result.len() {
                return Err(TypeError::Malformed {
                    path: here(path),
                    reason: format!("whilerec component {component} outside {}", display_seq(result)),
                });
            }
            if step.len() != carrier.len() {
                return Err(TypeError::Malformed {
                    path: here(path),
                    reason: format!(
                        "whilerec step has {} components, carrier {}",
                        step.len(),
                        display_seq(carrier)
                    ),
                });
            }
            path.push("guard");
            let tg = infer(guard, ctx, path)?;
            expect(&tg, &Type::arrows(carrier, Type::Nat), path)?;
            path.pop();
            path.push("step");
            for (s, target) in step.iter().zip(seq_arrow(carrier, carrier)) {
                let ts = infer(s, ctx, path)?;
                expect(&ts, &target, path)?;
            }
            path.pop();
            Ok(while_type(carrier, result, *component))
        }
        Term::Const(c) => Ok(c.ty.clone()),
        Term::Opaque(o) => Ok(o.ty()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::term::name;

    #[test]
    fn identity_on_nat() {
        let id = Term::lam("x", Type::Nat, Term::var("x", Type::Nat));
        assert_eq!(infer_type(&id, &Context::new()).unwrap().to_string(), "(-> nat nat)");
    }

    #[test]
    fn recursor_over_nat() {
        let r = Term::Rec {
            carrier: vec![Type::Nat],
            component: 0,
        };
        let expected = Type::arrows(
            &[Type::arrows(&[Type::Nat, Type::Nat], Type::Nat), Type::Nat, Type::Nat],
            Type::Nat,
        );
        assert_eq!(infer_type(&r, &Context::new()).unwrap(), expected);
    }

    #[test]
    fn suc_rejects_functions() {
        let f = Type::arrow(Type::Nat, Type::Nat);
        let t = Term::suc(Term::var("x", f.clone()));
        let mut ctx = Context::new();
        ctx.insert(name("x"), f);
        assert!(matches!(
            infer_type(&t, &ctx),
            Err(TypeError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn unbound_variables_are_reported() {
        let t = Term::suc(Term::var("y", Type::Nat));
        let err = infer_type(&t, &Context::new()).unwrap_err();
        assert_eq!(
            err,
            TypeError::UnboundVariable {
                name: name("y"),
                path: "suc".into()
            }
        );
    }
}
