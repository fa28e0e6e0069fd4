//! Seeded random programs for the two shipped models.
//!
//! Loops are generated descent-safe: the body never writes the loop
//! variable except through a final `dec`, and the variable is set to a small
//! constant just before the loop so iteration counts stay bounded.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Cmp, Command, Expr, Order, Pred};

fn pick<'a, R: Rng>(rng: &mut R, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("at least one variable")
}

fn nat_prim<R: Rng>(rng: &mut R, writable: &[&str], all: &[&str]) -> Command {
    let x = pick(rng, writable);
    let name = match rng.gen_range(0..5) {
        0 => format!("dec:{x}"),
        1 => format!("inc:{x}"),
        2 => format!("set:{x}:{}", rng.gen_range(0..=7)),
        3 => {
            let y = pick(rng, all);
            if y == x {
                format!("inc:{x}")
            } else {
                format!("copy:{x}:{y}")
            }
        }
        _ => format!("add:{x}:{}", pick(rng, all)),
    };
    Command::Prim(name)
}

fn nat_guard<R: Rng>(rng: &mut R, vars: &[&str]) -> Pred {
    let x = Expr::Var(pick(rng, vars).to_string());
    let k = Expr::Lit(rng.gen_range(0..=7) as f64);
    let op = *[Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge].choose(rng).unwrap();
    Pred::cmp(op, x, k)
}

/// A command tree of depth at most `depth` over the given `NatEnv`
/// variables.
pub fn nat_command<R: Rng>(rng: &mut R, depth: usize, vars: &[&str]) -> Command {
    nat_in(rng, depth, vars, vars)
}

fn nat_in<R: Rng>(rng: &mut R, depth: usize, writable: &[&str], all: &[&str]) -> Command {
    if depth <= 1 || writable.is_empty() {
        return if writable.is_empty() || rng.gen_bool(0.15) {
            Command::Skip
        } else {
            nat_prim(rng, writable, all)
        };
    }
    match rng.gen_range(0..10) {
        0 => Command::Skip,
        1 | 2 => nat_prim(rng, writable, all),
        3..=5 => Command::seq(nat_in(rng, depth - 1, writable, all), nat_in(rng, depth - 1, writable, all)),
        6 | 7 => Command::ite(
            nat_guard(rng, all),
            nat_in(rng, depth - 1, writable, all),
            nat_in(rng, depth - 1, writable, all),
        ),
        _ if depth >= 4 => {
            let v = pick(rng, writable);
            let inner: Vec<&str> = writable.iter().copied().filter(|w| *w != v).collect();
            let body = Command::seq(nat_in(rng, depth - 3, &inner, all), Command::Prim(format!("dec:{v}")));
            let guard = Pred::cmp(Cmp::Ne, Expr::Var(v.to_string()), Expr::Lit(0.0));
            Command::seq(
                Command::Prim(format!("set:{v}:{}", rng.gen_range(0..=4))),
                Command::while_do(Order::Lt(v.to_string()), guard, body),
            )
        }
        _ => nat_prim(rng, writable, all),
    }
}

/// A sequence of at most `len` differentiable `VecR` primitives.
pub fn vec_chain<R: Rng>(rng: &mut R, len: usize, dim: usize) -> Command {
    let n = rng.gen_range(1..=len.max(1));
    Command::seq_all((0..n).map(|_| {
        let i = rng.gen_range(0..dim);
        let j = rng.gen_range(0..dim);
        let c = [-1.5, -0.5, 0.5, 2.0][rng.gen_range(0..4)];
        Command::Prim(match rng.gen_range(0..6) {
            0 => format!("shift:{i}:{c}"),
            1 => format!("scale:{i}:{c}"),
            2 => format!("square:{i}"),
            3 => format!("cube:{i}"),
            4 => format!("add:{i}:{j}"),
            _ => format!("mul:{i}:{j}"),
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopd::{run, Env, NatEnv};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_respect_depth_and_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = NatEnv::new();
        for _ in 0..200 {
            let c = nat_command(&mut rng, 5, &["x", "y", "z"]);
            assert!(c.depth() <= 5, "{c}");
            let s = Env::state(&[("x", 3), ("y", 1), ("z", 0)]);
            let t = Env::dual(&[("x", 1), ("y", 1), ("z", 1)]);
            match run(&m, &c, s, t, 1_000_000) {
                Ok(_) | Err(crate::loopd::LoopError::Primitive { .. }) => {}
                Err(e) => panic!("{c}: {e}"),
            }
        }
    }

    #[test]
    fn chains_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let c = vec_chain(&mut rng, 6, 2);
            assert!(c.primitives().len() <= 6);
        }
    }
}
