use std::fmt;
use std::sync::Arc;

/// Simple types: `nat`, arrows, and abstract sorts such as the state sorts
/// `S` and `T` used by LOOP_D.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Nat,
    Arrow(Box<Type>, Box<Type>),
    Abstract(Arc<str>),
}

/// Ordered sequence of types. There are no product types; tuples only exist
/// at this meta level.
pub type TypeSeq = Vec<Type>;

impl Type {
    pub fn arrow(domain: Type, codomain: Type) -> Type {
        Type::Arrow(Box::new(domain), Box::new(codomain))
    }

    /// `A1 -> ... -> An -> result`, curried.
    pub fn arrows(domain: &[Type], result: Type) -> Type {
        domain
            .iter()
            .rev()
            .fold(result, |acc, d| Type::arrow(d.clone(), acc))
    }

    pub fn sort(name: &str) -> Type {
        Type::Abstract(Arc::from(name))
    }

    /// The forward state sort `S`.
    pub fn state() -> Type {
        Type::sort("S")
    }

    /// The dual state sort `T`.
    pub fn dual() -> Type {
        Type::sort("T")
    }

    pub fn is_nat(&self) -> bool {
        matches!(self, Type::Nat)
    }

    /// Splits `A1 -> ... -> An -> B` (B not an arrow) into `([A1..An], B)`.
    pub fn uncurry(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Type::Arrow(d, c) = cur {
            args.push(d.as_ref());
            cur = c.as_ref();
        }
        (args, cur)
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    /// True when every argument is ground (nat or abstract): the shape
    /// natively implemented constants are allowed to have.
    pub fn is_first_order(&self) -> bool {
        let (args, _) = self.uncurry();
        args.iter().all(|a| !matches!(a, Type::Arrow(..)))
    }
}

/// The arrow of sequences: `X -> Y` is `(X1 -> ... -> Xn -> Yj)` for each j.
pub fn seq_arrow(domain: &[Type], codomain: &[Type]) -> TypeSeq {
    codomain
        .iter()
        .map(|c| Type::arrows(domain, c.clone()))
        .collect()
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Nat => write!(f, "nat"),
            Type::Abstract(s) => write!(f, "{s}"),
            Type::Arrow(..) => {
                let (args, res) = self.uncurry();
                write!(f, "(->")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, " {res})")
            }
        }
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn display_seq(types: &[Type]) -> String {
    let parts: Vec<String> = types.iter().map(|t| t.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arrows_are_right_nested() {
        let t = Type::arrows(&[Type::Nat, Type::state()], Type::Nat);
        assert_eq!(t, Type::arrow(Type::Nat, Type::arrow(Type::state(), Type::Nat)));
        assert_eq!(t.to_string(), "(-> nat S nat)");
        assert_eq!(t.arity(), 2);
    }

    #[test]
    fn sequence_arrow_curries_per_component() {
        let s = seq_arrow(&[Type::Nat, Type::Nat], &[Type::Nat, Type::state()]);
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].to_string(), "(-> nat nat S)");
        assert!(seq_arrow(&[Type::Nat], &[]).is_empty());
        assert_eq!(seq_arrow(&[], &[Type::Nat]), vec![Type::Nat]);
    }
}
