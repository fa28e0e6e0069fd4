use std::any::Any;
use std::fmt;
use std::sync::Arc;

use super::types::{Type, TypeSeq};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A value of an abstract sort, carried opaquely through the kernel.
pub trait OpaqueData: Any + fmt::Debug + fmt::Display + Send + Sync {
    /// Name of the abstract sort this value inhabits.
    fn sort(&self) -> &str;
    /// The decidable equality of the sort.
    fn eq_dyn(&self, other: &dyn OpaqueData) -> bool;
    fn as_any(&self) -> &dyn Any;
}

#[derive(Clone)]
pub struct Opaque(pub Arc<dyn OpaqueData>);

impl Opaque {
    pub fn new<D: OpaqueData>(data: D) -> Self {
        Opaque(Arc::new(data))
    }

    pub fn sort(&self) -> &str {
        self.0.sort()
    }

    pub fn downcast<D: 'static>(&self) -> Option<&D> {
        self.0.as_any().downcast_ref::<D>()
    }

    pub fn ty(&self) -> Type {
        Type::sort(self.sort())
    }
}

impl PartialEq for Opaque {
    fn eq(&self, other: &Self) -> bool {
        self.0.sort() == other.0.sort() && self.0.eq_dyn(other.0.as_ref())
    }
}

impl fmt::Debug for Opaque {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

impl fmt::Display for Opaque {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Ground data exchanged with native constants.
#[derive(Clone, Debug, PartialEq)]
pub enum Datum {
    Nat(u64),
    Opaque(Opaque),
}

impl Datum {
    pub fn nat(&self) -> Option<u64> {
        match self {
            Datum::Nat(n) => Some(*n),
            Datum::Opaque(_) => None,
        }
    }

    pub fn opaque(&self) -> Option<&Opaque> {
        match self {
            Datum::Opaque(o) => Some(o),
            Datum::Nat(_) => None,
        }
    }
}

pub type NativeFn = Arc<dyn Fn(&[Datum]) -> Result<Datum, String> + Send + Sync>;

/// A named constant. Constants with a native implementation must have a
/// first-order type; constants without one (epsilon names, uninterpreted
/// parameters) are stuck under evaluation.
#[derive(Clone)]
pub struct Constant {
    pub name: Name,
    pub ty: Type,
    native: Option<NativeFn>,
}

impl Constant {
    pub fn new(name: &str, ty: Type) -> Self {
        Constant {
            name: self::name(name),
            ty,
            native: None,
        }
    }

    pub fn native(
        name: &str,
        ty: Type,
        f: impl Fn(&[Datum]) -> Result<Datum, String> + Send + Sync + 'static,
    ) -> Self {
        assert!(
            ty.is_first_order(),
            "native constant {name} must have a first-order type"
        );
        Constant {
            name: self::name(name),
            ty,
            native: Some(Arc::new(f)),
        }
    }

    pub fn arity(&self) -> usize {
        self.ty.arity()
    }

    pub fn implementation(&self) -> Option<&NativeFn> {
        self.native.as_ref()
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.ty == other.ty
    }
}

impl fmt::Debug for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.ty)
    }
}

/// A decidable binary relation `y ≺ x` over a carrier sequence, given as a
/// closed decider `carrier -> carrier -> nat` (first the `y` block, then the
/// `x` block); `0` means the relation holds.
#[derive(Clone)]
pub struct Relation {
    pub name: Name,
    pub carrier: TypeSeq,
    pub decider: Term,
    /// Optional variant measure `carrier -> nat` that must strictly decrease
    /// along every descent step.
    pub measure: Option<Term>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.carrier == other.carrier
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// System T terms with the conditional, the primitive recursor and the while
/// recursor. Variables carry their type.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Var(Name, Type),
    Lam(Name, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Zero,
    Suc(Box<Term>),
    /// Component `component` of the simultaneous recursor over `carrier`:
    /// `(nat -> X -> X) -> X -> nat -> X_j`.
    Rec { carrier: TypeSeq, component: usize },
    /// `ite b s t` is `s` when `b` evaluates to 0 and `t` otherwise.
    Ite(Box<Term>, Box<Term>, Box<Term>),
    /// Component `component` of the while recursor
    /// `(X -> U) -> (X -> U -> U) -> X -> U_j` for the relation's carrier `X`.
    WhileRec {
        relation: Arc<Relation>,
        guard: Box<Term>,
        step: Vec<Term>,
        result: TypeSeq,
        component: usize,
    },
    Const(Arc<Constant>),
    Opaque(Opaque),
}

pub type TermSeq = Vec<Term>;

impl Term {
    pub fn var(n: &str, ty: Type) -> Term {
        Term::Var(name(n), ty)
    }

    pub fn lam(n: &str, ty: Type, body: Term) -> Term {
        Term::Lam(name(n), ty, Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn suc(t: Term) -> Term {
        Term::Suc(Box::new(t))
    }

    pub fn ite(b: Term, s: Term, t: Term) -> Term {
        Term::Ite(Box::new(b), Box::new(s), Box::new(t))
    }

    pub fn constant(c: Constant) -> Term {
        Term::Const(Arc::new(c))
    }

    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Term::Zero, |acc, _| Term::suc(acc))
    }

    /// `Some(n)` when the term is a suc-tower over zero.
    pub fn as_numeral(&self) -> Option<u64> {
        let mut n = 0;
        let mut cur = self;
        loop {
            match cur {
                Term::Zero => return Some(n),
                Term::Suc(inner) => {
                    n += 1;
                    cur = inner;
                }
                _ => return None,
            }
        }
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(..) | Term::Zero | Term::Rec { .. } | Term::Const(_) | Term::Opaque(_) => 1,
            Term::Lam(_, _, b) | Term::Suc(b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Ite(b, s, t) => 1 + b.size() + s.size() + t.size(),
            Term::WhileRec { guard, step, .. } => {
                1 + guard.size() + step.iter().map(Term::size).sum::<usize>()
            }
        }
    }
}
