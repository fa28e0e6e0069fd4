//! Each command denotes a pair of kernel terms (forward, backward). The
//! stack machine and the decomposition agree on random programs.

use dialectica::kernel::syntax::term_to_string;
use dialectica::loopd::random::nat_command;
use dialectica::loopd::{decompose, denote, parse_command, run, Env, NatEnv};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = NatEnv::new();
    let c = parse_command("(seq (prim inc:x) (prim add:y:x))")?;
    let d = decompose(&m, &c)?;
    println!("{c}\n  forward  {}\n  backward {}", term_to_string(&d.forward), term_to_string(&d.backward));

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (s, t) = (Env::state(&[("x", 2), ("y", 1), ("z", 0)]), Env::dual(&[("x", 1), ("y", 1), ("z", 1)]));
    let mut agree = 0;
    for _ in 0..20 {
        let c = nat_command(&mut rng, 4, &["x", "y", "z"]);
        let machine = run(&m, &c, s.clone(), t.clone(), 100_000).map(|(a, b, _)| (a, b));
        let denoted = denote(&m, &c, &s, &t, 100_000);
        agree += match (machine, denoted) {
            (Ok(a), Ok(b)) => (a == b) as usize,
            (Err(_), Err(_)) => 1,
            _ => 0,
        };
    }
    println!("machine and decomposition agree on {agree}/20 random programs");
    Ok(())
}
