//! A small procedural language whose commands carry a forward state map and
//! a backward dual map. Running a command is a forward pass that records
//! pre-states and backward maps on two stacks, followed by a backward pass
//! that pops them.

pub mod denote;
pub mod grad;
pub mod hoare;
pub mod machine;
pub mod models;
pub mod random;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::sexpr::{read_one, ParseError, Sexp};
use crate::kernel::OpaqueData;

pub use denote::{decompose, denote, Decomposed};
pub use grad::gradient;
pub use hoare::{check_contracts, check_loopd_triple, Contract, TripleBudget};
pub use machine::{backward_run, forward_run, run, Event, Frame, Outcome, Trace};
pub use models::{Env, NatEnv, VecR, Vector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("unknown primitive {0}")]
    UnknownPrimitive(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("primitive {prim} failed: {reason}")]
    Primitive { prim: String, reason: String },
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("descent violation: guard holds at {at} but the body leaves {after}, not below under {order}")]
    DescentViolation { order: String, at: String, after: String },
    #[error("stack mismatch: {states} states against {commands} backward commands")]
    StackMismatch { states: usize, commands: usize },
    #[error("predicate mentions {0}, which is not a state or dual component")]
    PredicateArity(String),
    #[error("{0} is not differentiable")]
    NonDifferentiablePrimitive(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("bad literal {literal}: {reason}")]
    Literal { literal: String, reason: String },
    #[error("{0} has no well-founded order")]
    NoOrder(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("kernel evaluation failed: {0}")]
    Kernel(String),
}

/// Arithmetic over state and dual components, evaluated in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(f64),
    Var(String),
    Dual(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

const CMPS: [(Cmp, &str); 6] = [
    (Cmp::Eq, "eq"),
    (Cmp::Ne, "ne"),
    (Cmp::Lt, "lt"),
    (Cmp::Le, "le"),
    (Cmp::Gt, "gt"),
    (Cmp::Ge, "ge"),
];

/// Quantifier-free predicates over a state and, in triples, a dual.
#[derive(Clone, Debug, PartialEq)]
pub enum Pred {
    True,
    False,
    Cmp(Cmp, Expr, Expr),
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Imp(Box<Pred>, Box<Pred>),
}

/// Well-founded orders a loop may descend along.
#[derive(Clone, Debug, PartialEq)]
pub enum Order {
    /// The named component strictly decreases and stays non-negative.
    Lt(String),
    /// The sum of all components strictly decreases.
    Sum,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Lt(x) => write!(f, "(lt {x})"),
            Order::Sum => write!(f, "(sum)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Skip,
    Prim(String),
    Seq(Box<Command>, Box<Command>),
    If(Pred, Box<Command>, Box<Command>),
    While(Order, Pred, Box<Command>),
}

impl Command {
    pub fn prim(name: &str) -> Command {
        Command::Prim(name.to_string())
    }

    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; `skip` when empty.
    pub fn seq_all(cs: impl IntoIterator<Item = Command>) -> Command {
        let mut cs: Vec<Command> = cs.into_iter().collect();
        let Some(mut acc) = cs.pop() else {
            return Command::Skip;
        };
        while let Some(c) = cs.pop() {
            acc = Command::seq(c, acc);
        }
        acc
    }

    pub fn ite(p: Pred, a: Command, b: Command) -> Command {
        Command::If(p, Box::new(a), Box::new(b))
    }

    pub fn while_do(order: Order, guard: Pred, body: Command) -> Command {
        Command::While(order, guard, Box::new(body))
    }

    pub fn depth(&self) -> usize {
        match self {
            Command::Skip | Command::Prim(_) => 1,
            Command::Seq(a, b) | Command::If(_, a, b) => 1 + a.depth().max(b.depth()),
            Command::While(_, _, b) => 1 + b.depth(),
        }
    }

    pub fn primitives(&self) -> Vec<&str> {
        match self {
            Command::Skip => vec![],
            Command::Prim(p) => vec![p.as_str()],
            Command::Seq(a, b) | Command::If(_, a, b) => {
                let mut v = a.primitives();
                v.extend(b.primitives());
                v
            }
            Command::While(_, _, b) => b.primitives(),
        }
    }
}

pub type ForwardFn<S> = Arc<dyn Fn(&S) -> Result<S, String> + Send + Sync>;
pub type BackwardFn<S, T> = Arc<dyn Fn(&S, &T) -> Result<T, String> + Send + Sync>;

/// A primitive command: a forward map on states paired with a backward map
/// on duals that may read the pre-state.
pub struct Primitive<S, T> {
    pub name: String,
    pub forward: ForwardFn<S>,
    pub backward: BackwardFn<S, T>,
}

impl<S, T> Clone for Primitive<S, T> {
    fn clone(&self) -> Self {
        Primitive {
            name: self.name.clone(),
            forward: self.forward.clone(),
            backward: self.backward.clone(),
        }
    }
}

impl<S, T> Primitive<S, T> {
    pub fn new(
        name: &str,
        forward: impl Fn(&S) -> Result<S, String> + Send + Sync + 'static,
        backward: impl Fn(&S, &T) -> Result<T, String> + Send + Sync + 'static,
    ) -> Self {
        Primitive {
            name: name.to_string(),
            forward: Arc::new(forward),
            backward: Arc::new(backward),
        }
    }

    pub fn forward(&self, s: &S) -> Result<S, LoopError> {
        (self.forward)(s).map_err(|reason| LoopError::Primitive {
            prim: self.name.clone(),
            reason,
        })
    }

    pub fn backward(&self, s: &S, t: &T) -> Result<T, LoopError> {
        (self.backward)(s, t).map_err(|reason| LoopError::Primitive {
            prim: self.name.clone(),
            reason,
        })
    }
}

/// Carriers, primitives, guards and orders for states `S` and duals `T`.
pub trait StateModel: Clone + Send + Sync + 'static {
    type S: OpaqueData + Clone;
    type T: OpaqueData + Clone;

    fn primitive(&self, name: &str) -> Result<Primitive<Self::S, Self::T>, LoopError>;
    fn read_state(&self, s: &Self::S, var: &str) -> Result<f64, LoopError>;
    fn read_dual(&self, t: &Self::T, var: &str) -> Result<f64, LoopError>;
    /// `after ≺ before`.
    fn below(&self, order: &Order, after: &Self::S, before: &Self::S) -> Result<bool, LoopError>;
    fn eq_state(&self, a: &Self::S, b: &Self::S) -> bool;
    fn eq_dual(&self, a: &Self::T, b: &Self::T) -> bool;
    fn parse_state(&self, src: &str) -> Result<Self::S, LoopError>;
    fn parse_dual(&self, src: &str) -> Result<Self::T, LoopError>;
}

impl Expr {
    pub fn eval<M: StateModel>(&self, m: &M, s: &M::S, t: Option<&M::T>) -> Result<f64, LoopError> {
        Ok(match self {
            Expr::Lit(x) => *x,
            Expr::Var(v) => m.read_state(s, v)?,
            Expr::Dual(v) => match t {
                Some(t) => m.read_dual(t, v)?,
                None => return Err(LoopError::PredicateArity(format!("(dual {v})"))),
            },
            Expr::Add(a, b) => a.eval(m, s, t)? + b.eval(m, s, t)?,
            Expr::Sub(a, b) => a.eval(m, s, t)? - b.eval(m, s, t)?,
            Expr::Mul(a, b) => a.eval(m, s, t)? * b.eval(m, s, t)?,
        })
    }
}

impl Pred {
    pub fn not(p: Pred) -> Pred {
        Pred::Not(Box::new(p))
    }

    pub fn and(a: Pred, b: Pred) -> Pred {
        Pred::And(Box::new(a), Box::new(b))
    }

    pub fn cmp(op: Cmp, a: Expr, b: Expr) -> Pred {
        Pred::Cmp(op, a, b)
    }

    /// Evaluates over a state; `t` is needed only when the predicate reads
    /// dual components.
    pub fn holds<M: StateModel>(&self, m: &M, s: &M::S, t: Option<&M::T>) -> Result<bool, LoopError> {
        Ok(match self {
            Pred::True => true,
            Pred::False => false,
            Pred::Cmp(op, a, b) => {
                let (x, y) = (a.eval(m, s, t)?, b.eval(m, s, t)?);
                match op {
                    Cmp::Eq => x == y,
                    Cmp::Ne => x != y,
                    Cmp::Lt => x < y,
                    Cmp::Le => x <= y,
                    Cmp::Gt => x > y,
                    Cmp::Ge => x >= y,
                }
            }
            Pred::Not(p) => !p.holds(m, s, t)?,
            Pred::And(a, b) => a.holds(m, s, t)? && b.holds(m, s, t)?,
            Pred::Or(a, b) => a.holds(m, s, t)? || b.holds(m, s, t)?,
            Pred::Imp(a, b) => !a.holds(m, s, t)? || b.holds(m, s, t)?,
        })
    }
}

// Parsing

fn err(s: &Sexp, msg: impl Into<String>) -> ParseError {
    ParseError::new(s.pos(), msg)
}

pub fn parse_command(src: &str) -> Result<Command, ParseError> {
    command(&read_one(src)?)
}

pub fn parse_pred(src: &str) -> Result<Pred, ParseError> {
    pred(&read_one(src)?)
}

pub fn command(s: &Sexp) -> Result<Command, ParseError> {
    if let Some(a) = s.atom() {
        return match a {
            "skip" => Ok(Command::Skip),
            _ => Err(err(s, format!("expected a command, found {a}"))),
        };
    }
    let items = s.expect_list("command")?;
    let args = &items[1..];
    match s.head() {
        Some("skip") if args.is_empty() => Ok(Command::Skip),
        Some("prim") if args.len() == 1 => Ok(Command::Prim(args[0].expect_atom("primitive name")?.to_string())),
        Some("seq") => Ok(Command::seq_all(args.iter().map(command).collect::<Result<Vec<_>, _>>()?)),
        Some("if") if args.len() == 3 => Ok(Command::ite(pred(&args[0])?, command(&args[1])?, command(&args[2])?)),
        Some("while") if args.len() == 3 => Ok(Command::while_do(order(&args[0])?, pred(&args[1])?, command(&args[2])?)),
        _ => Err(err(s, "expected skip, (prim p), (seq C ...), (if phi C C) or (while rel phi C)")),
    }
}

fn order(s: &Sexp) -> Result<Order, ParseError> {
    let items = s.expect_list("order")?;
    match (s.head(), items.len()) {
        (Some("lt"), 2) => Ok(Order::Lt(items[1].expect_atom("variable")?.to_string())),
        (Some("sum"), 1) => Ok(Order::Sum),
        _ => Err(err(s, "expected (lt x) or (sum)")),
    }
}

pub fn pred(s: &Sexp) -> Result<Pred, ParseError> {
    if let Some(a) = s.atom() {
        return match a {
            "true" => Ok(Pred::True),
            "false" => Ok(Pred::False),
            _ => Err(err(s, format!("expected a predicate, found {a}"))),
        };
    }
    let items = s.expect_list("predicate")?;
    let args = &items[1..];
    let head = s.head().unwrap_or("");
    if let Some((op, _)) = CMPS.iter().find(|(_, n)| *n == head) {
        if args.len() != 2 {
            return Err(err(s, format!("{head} takes two operands")));
        }
        return Ok(Pred::Cmp(*op, expr(&args[0])?, expr(&args[1])?));
    }
    match (head, args.len()) {
        ("not", 1) => Ok(Pred::not(pred(&args[0])?)),
        ("and", 2) => Ok(Pred::and(pred(&args[0])?, pred(&args[1])?)),
        ("or", 2) => Ok(Pred::Or(Box::new(pred(&args[0])?), Box::new(pred(&args[1])?))),
        ("imp", 2) => Ok(Pred::Imp(Box::new(pred(&args[0])?), Box::new(pred(&args[1])?))),
        _ => Err(err(s, format!("unknown predicate form {head}"))),
    }
}

fn expr(s: &Sexp) -> Result<Expr, ParseError> {
    if let Some(a) = s.atom() {
        return Ok(match a.parse::<f64>() {
            Ok(x) => Expr::Lit(x),
            Err(_) => Expr::Var(a.to_string()),
        });
    }
    let items = s.expect_list("expression")?;
    let args = &items[1..];
    let bin = |f: fn(Box<Expr>, Box<Expr>) -> Expr| -> Result<Expr, ParseError> {
        if args.len() != 2 {
            return Err(err(s, "arithmetic takes two operands"));
        }
        Ok(f(Box::new(expr(&args[0])?), Box::new(expr(&args[1])?)))
    };
    match s.head() {
        Some("dual") if args.len() == 1 => Ok(Expr::Dual(args[0].expect_atom("component")?.to_string())),
        Some("add") => bin(Expr::Add),
        Some("sub") => bin(Expr::Sub),
        Some("mul") => bin(Expr::Mul),
        _ => Err(err(s, "expected a number, a component, (dual x), add, sub or mul")),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(x) => write!(f, "{x}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Dual(v) => write!(f, "(dual {v})"),
            Expr::Add(a, b) => write!(f, "(add {a} {b})"),
            Expr::Sub(a, b) => write!(f, "(sub {a} {b})"),
            Expr::Mul(a, b) => write!(f, "(mul {a} {b})"),
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::True => write!(f, "true"),
            Pred::False => write!(f, "false"),
            Pred::Cmp(op, a, b) => {
                let name = CMPS.iter().find(|(o, _)| o == op).map(|(_, n)| *n).unwrap();
                write!(f, "({name} {a} {b})")
            }
            Pred::Not(p) => write!(f, "(not {p})"),
            Pred::And(a, b) => write!(f, "(and {a} {b})"),
            Pred::Or(a, b) => write!(f, "(or {a} {b})"),
            Pred::Imp(a, b) => write!(f, "(imp {a} {b})"),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Skip => write!(f, "skip"),
            Command::Prim(p) => write!(f, "(prim {p})"),
            Command::Seq(a, b) => write!(f, "(seq {a} {b})"),
            Command::If(p, a, b) => write!(f, "(if {p} {a} {b})"),
            Command::While(o, p, b) => write!(f, "(while {o} {p} {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commands_round_trip() {
        let src = "(seq (prim set:y:0) (while (lt x) (ne x 0) (seq (prim dec:x) (prim inc:y))))";
        let c = parse_command(src).unwrap();
        assert_eq!(c.to_string(), src);
        assert_eq!(parse_command(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn nary_seq_nests_to_the_right() {
        let c = parse_command("(seq (prim a) (prim b) (prim c))").unwrap();
        assert_eq!(c.to_string(), "(seq (prim a) (seq (prim b) (prim c)))");
        assert_eq!(parse_command("(seq)").unwrap(), Command::Skip);
    }

    #[test]
    fn predicates_parse_duals_and_arithmetic() {
        let p = parse_pred("(imp (gt x 0) (eq (dual x) (mul 2 (add x 1))))").unwrap();
        assert_eq!(p.to_string(), "(imp (gt x 0) (eq (dual x) (mul 2 (add x 1))))");
        assert!(parse_pred("(frob x)").is_err());
    }
}
