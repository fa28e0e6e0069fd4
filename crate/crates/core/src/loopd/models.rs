//! The two shipped state models.
//!
//! `NatEnv` states and duals are finite maps from variable names to naturals.
//! Builtin primitives are named by family and arguments:
//!
//! | name        | forward        | backward on the dual                  |
//! |-------------|----------------|---------------------------------------|
//! | `dec:x`     | `x := x - 1`   | `t.x := 0` when `x` was already 0     |
//! | `inc:x`     | `x := x + 1`   | identity                              |
//! | `set:x:n`   | `x := n`       | `t.x := 0`                            |
//! | `copy:x:y`  | `x := y`       | `t.y += t.x; t.x := 0`                |
//! | `add:x:y`   | `x := x + y`   | `t.y += t.x`                          |
//!
//! The backward maps are the transposed derivatives of the forward maps,
//! read on naturals. `VecR` does the same on real vectors, where the reading
//! is exact: every primitive's backward map is its vector-Jacobian product.

use std::any::Any;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{LoopError, Order, Primitive, StateModel};
use crate::kernel::OpaqueData;

/// A nat environment, tagged with the sort it inhabits (`S` or `T`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Env {
    pub sort: &'static str,
    pub vals: BTreeMap<String, u64>,
}

impl Env {
    pub fn state(pairs: &[(&str, u64)]) -> Env {
        Env {
            sort: "S",
            vals: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn dual(pairs: &[(&str, u64)]) -> Env {
        Env {
            sort: "T",
            ..Env::state(pairs)
        }
    }

    pub fn get(&self, x: &str) -> Result<u64, String> {
        self.vals.get(x).copied().ok_or_else(|| format!("no component {x}"))
    }

    fn with(&self, x: &str, v: u64) -> Result<Env, String> {
        if !self.vals.contains_key(x) {
            return Err(format!("no component {x}"));
        }
        let mut out = self.clone();
        out.vals.insert(x.to_string(), v);
        Ok(out)
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vals.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl OpaqueData for Env {
    fn sort(&self) -> &str {
        self.sort
    }

    fn eq_dyn(&self, other: &dyn OpaqueData) -> bool {
        other.as_any().downcast_ref::<Env>() == Some(self)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn parse_env(src: &str, sort: &'static str) -> Result<Env, LoopError> {
    let bad = |reason: &str| LoopError::Literal {
        literal: src.to_string(),
        reason: reason.to_string(),
    };
    let inner = src
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| bad("expected {name:value, ...}"))?;
    let mut vals = BTreeMap::new();
    for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once(':').ok_or_else(|| bad("expected name:value"))?;
        let k = k.trim();
        if k.is_empty() || !k.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(bad("bad variable name"));
        }
        let v: u64 = v.trim().parse().map_err(|_| bad("value is not a natural number"))?;
        if vals.insert(k.to_string(), v).is_some() {
            return Err(bad("duplicate variable"));
        }
    }
    Ok(Env { sort, vals })
}

#[derive(Clone, Default)]
pub struct NatEnv {
    custom: BTreeMap<String, Primitive<Env, Env>>,
}

impl NatEnv {
    pub fn new() -> NatEnv {
        NatEnv::default()
    }

    /// Adds or overrides a primitive.
    pub fn register(&mut self, p: Primitive<Env, Env>) {
        self.custom.insert(p.name.clone(), p);
    }

    fn builtin(&self, name: &str) -> Option<Primitive<Env, Env>> {
        let parts: Vec<&str> = name.split(':').collect();
        let var = |i: usize| parts.get(i).map(|s| s.to_string());
        let p = match parts.as_slice() {
            ["dec", _] => {
                let x = var(1)?;
                let y = x.clone();
                Primitive::new(
                    name,
                    move |s: &Env| s.with(&x, s.get(&x)?.saturating_sub(1)),
                    move |s: &Env, t: &Env| {
                        if s.get(&y)? == 0 {
                            t.with(&y, 0)
                        } else {
                            t.with(&y, t.get(&y)?)
                        }
                    },
                )
            }
            ["inc", _] => {
                let x = var(1)?;
                let y = x.clone();
                Primitive::new(
                    name,
                    move |s: &Env| {
                        let v = s.get(&x)?.checked_add(1).ok_or("overflow")?;
                        s.with(&x, v)
                    },
                    move |_: &Env, t: &Env| t.with(&y, t.get(&y)?),
                )
            }
            ["set", _, n] => {
                let n: u64 = n.parse().ok()?;
                let x = var(1)?;
                let y = x.clone();
                Primitive::new(name, move |s: &Env| s.with(&x, n), move |_: &Env, t: &Env| t.with(&y, 0))
            }
            ["copy", a, b] if a != b => {
                let (x, y) = (a.to_string(), b.to_string());
                let (x2, y2) = (x.clone(), y.clone());
                Primitive::new(
                    name,
                    move |s: &Env| s.with(&x, s.get(&y)?),
                    move |_: &Env, t: &Env| {
                        let ty = t.get(&y2)?.checked_add(t.get(&x2)?).ok_or("overflow")?;
                        t.with(&y2, ty)?.with(&x2, 0)
                    },
                )
            }
            ["add", a, b] => {
                let (x, y) = (a.to_string(), b.to_string());
                let (x2, y2) = (x.clone(), y.clone());
                Primitive::new(
                    name,
                    move |s: &Env| {
                        let v = s.get(&x)?.checked_add(s.get(&y)?).ok_or("overflow")?;
                        s.with(&x, v)
                    },
                    move |_: &Env, t: &Env| {
                        let v = t.get(&y2)?.checked_add(t.get(&x2)?).ok_or("overflow")?;
                        t.with(&y2, v)
                    },
                )
            }
            _ => return None,
        };
        Some(p)
    }
}

impl StateModel for NatEnv {
    type S = Env;
    type T = Env;

    fn primitive(&self, name: &str) -> Result<Primitive<Env, Env>, LoopError> {
        self.custom
            .get(name)
            .cloned()
            .or_else(|| self.builtin(name))
            .ok_or_else(|| LoopError::UnknownPrimitive(name.to_string()))
    }

    fn read_state(&self, s: &Env, var: &str) -> Result<f64, LoopError> {
        s.get(var).map(|v| v as f64).map_err(|_| LoopError::UnknownVariable(var.to_string()))
    }

    fn read_dual(&self, t: &Env, var: &str) -> Result<f64, LoopError> {
        self.read_state(t, var)
    }

    fn below(&self, order: &Order, after: &Env, before: &Env) -> Result<bool, LoopError> {
        Ok(match order {
            Order::Lt(x) => self.read_state(after, x)? < self.read_state(before, x)?,
            Order::Sum => {
                let sum = |e: &Env| e.vals.values().map(|v| *v as u128).sum::<u128>();
                sum(after) < sum(before)
            }
        })
    }

    fn eq_state(&self, a: &Env, b: &Env) -> bool {
        a.vals == b.vals
    }

    fn eq_dual(&self, a: &Env, b: &Env) -> bool {
        a.vals == b.vals
    }

    fn parse_state(&self, src: &str) -> Result<Env, LoopError> {
        parse_env(src, "S")
    }

    fn parse_dual(&self, src: &str) -> Result<Env, LoopError> {
        parse_env(src, "T")
    }
}

/// Absolute tolerance of equality on real vectors.
pub const VEC_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    pub sort: &'static str,
    pub data: Vec<f64>,
}

impl Vector {
    pub fn state(data: Vec<f64>) -> Vector {
        Vector { sort: "S", data }
    }

    pub fn dual(data: Vec<f64>) -> Vector {
        Vector { sort: "T", data }
    }

    pub fn close_to(&self, other: &Vector) -> bool {
        self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).abs() <= VEC_TOLERANCE)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.data.iter().map(|x| format!("{x:?}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl OpaqueData for Vector {
    fn sort(&self) -> &str {
        self.sort
    }

    fn eq_dyn(&self, other: &dyn OpaqueData) -> bool {
        other.as_any().downcast_ref::<Vector>().is_some_and(|o| self.close_to(o))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

type Grad = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Real vectors of a fixed dimension. Primitives:
/// `shift:i:c`, `scale:i:c`, `square:i`, `cube:i`, `add:i:j`, `mul:i:j`,
/// plus `square` and `add1` for `square:0` and `shift:0:1`.
#[derive(Clone)]
pub struct VecR {
    pub dim: usize,
}

impl VecR {
    pub fn new(dim: usize) -> VecR {
        VecR { dim }
    }

    /// The forward map and its vector-Jacobian product, both in place.
    #[allow(clippy::type_complexity)]
    fn family(&self, name: &str) -> Option<(Arc<dyn Fn(&mut [f64]) + Send + Sync>, Grad)> {
        let name = match name {
            "square" => "square:0",
            "add1" => "shift:0:1",
            n => n,
        };
        let parts: Vec<&str> = name.split(':').collect();
        let idx = |s: &str| s.parse::<usize>().ok().filter(|i| *i < self.dim);
        let num = |s: &str| s.parse::<f64>().ok().filter(|c| c.is_finite());
        Some(match parts.as_slice() {
            ["shift", i, c] => {
                let (i, c) = (idx(i)?, num(c)?);
                (Arc::new(move |x: &mut [f64]| x[i] += c), Arc::new(|_: &[f64], _: &mut [f64]| {}))
            }
            ["scale", i, c] => {
                let (i, c) = (idx(i)?, num(c)?);
                (
                    Arc::new(move |x: &mut [f64]| x[i] *= c),
                    Arc::new(move |_: &[f64], t: &mut [f64]| t[i] *= c),
                )
            }
            ["square", i] => {
                let i = idx(i)?;
                (
                    Arc::new(move |x: &mut [f64]| x[i] *= x[i]),
                    Arc::new(move |s: &[f64], t: &mut [f64]| t[i] *= 2.0 * s[i]),
                )
            }
            ["cube", i] => {
                let i = idx(i)?;
                (
                    Arc::new(move |x: &mut [f64]| x[i] = x[i] * x[i] * x[i]),
                    Arc::new(move |s: &[f64], t: &mut [f64]| t[i] *= 3.0 * s[i] * s[i]),
                )
            }
            ["add", i, j] => {
                let (i, j) = (idx(i)?, idx(j)?);
                (
                    Arc::new(move |x: &mut [f64]| x[i] += x[j]),
                    Arc::new(move |_: &[f64], t: &mut [f64]| t[j] += t[i]),
                )
            }
            ["mul", i, j] => {
                let (i, j) = (idx(i)?, idx(j)?);
                (
                    Arc::new(move |x: &mut [f64]| x[i] *= x[j]),
                    Arc::new(move |s: &[f64], t: &mut [f64]| {
                        if i == j {
                            t[i] *= 2.0 * s[i];
                        } else {
                            let ti = t[i];
                            t[i] = ti * s[j];
                            t[j] += ti * s[i];
                        }
                    }),
                )
            }
            _ => return None,
        })
    }

    fn check_dim(&self, v: &Vector) -> Result<(), String> {
        if v.data.len() != self.dim {
            return Err(format!("dimension {} instead of {}", v.data.len(), self.dim));
        }
        Ok(())
    }

    fn component(&self, var: &str) -> Result<usize, LoopError> {
        var.strip_prefix('x')
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|i| *i < self.dim)
            .ok_or_else(|| LoopError::UnknownVariable(var.to_string()))
    }

    fn parse(&self, src: &str, sort: &'static str) -> Result<Vector, LoopError> {
        let data: Vec<f64> = serde_json::from_str(src.trim()).map_err(|e| LoopError::Literal {
            literal: src.to_string(),
            reason: e.to_string(),
        })?;
        if data.len() != self.dim {
            return Err(LoopError::DimensionMismatch {
                expected: self.dim,
                found: data.len(),
            });
        }
        Ok(Vector { sort, data })
    }
}

impl StateModel for VecR {
    type S = Vector;
    type T = Vector;

    fn primitive(&self, name: &str) -> Result<Primitive<Vector, Vector>, LoopError> {
        let (fwd, grad) = self
            .family(name)
            .ok_or_else(|| LoopError::UnknownPrimitive(name.to_string()))?;
        let (m1, m2) = (self.clone(), self.clone());
        Ok(Primitive::new(
            name,
            move |s: &Vector| {
                m1.check_dim(s)?;
                let mut out = s.clone();
                fwd(&mut out.data);
                Ok(out)
            },
            move |s: &Vector, t: &Vector| {
                m2.check_dim(s)?;
                m2.check_dim(t)?;
                let mut out = t.clone();
                grad(&s.data, &mut out.data);
                Ok(out)
            },
        ))
    }

    fn read_state(&self, s: &Vector, var: &str) -> Result<f64, LoopError> {
        Ok(s.data[self.component(var)?])
    }

    fn read_dual(&self, t: &Vector, var: &str) -> Result<f64, LoopError> {
        Ok(t.data[self.component(var)?])
    }

    /// `(lt xi)`: the component drops by at least one and stays non-negative.
    fn below(&self, order: &Order, after: &Vector, before: &Vector) -> Result<bool, LoopError> {
        match order {
            Order::Lt(x) => {
                let i = self.component(x)?;
                Ok(after.data[i] >= 0.0 && after.data[i] <= before.data[i] - 1.0)
            }
            Order::Sum => Err(LoopError::NoOrder("the sum of real components".to_string())),
        }
    }

    fn eq_state(&self, a: &Vector, b: &Vector) -> bool {
        a.close_to(b)
    }

    fn eq_dual(&self, a: &Vector, b: &Vector) -> bool {
        a.close_to(b)
    }

    fn parse_state(&self, src: &str) -> Result<Vector, LoopError> {
        self.parse(src, "S")
    }

    fn parse_dual(&self, src: &str) -> Result<Vector, LoopError> {
        self.parse(src, "T")
    }
}
