//! A LOOP_D countdown on natural-number environments: forward pass, backward
//! pass and the event trace.

use dialectica::loopd::{parse_command, run, Env, NatEnv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = parse_command("(seq (prim copy:y:x) (while (lt x) (ne x 0) (seq (prim dec:x) (prim inc:y))))")?;
    let (s, t, trace) = run(&NatEnv::new(), &c, Env::state(&[("x", 3), ("y", 0)]), Env::dual(&[("x", 0), ("y", 1)]), 10_000)?;
    println!("{c}");
    println!("state {s}, dual {t}");
    for e in &trace.events {
        println!("  {e}");
    }
    println!("{} forward, {} backward", trace.forward_count(), trace.backward_count());

    // A body that climbs is stopped at the first guarded step.
    let bad = parse_command("(while (lt x) (ne x 0) (prim inc:x))")?;
    match run(&NatEnv::new(), &bad, Env::state(&[("x", 2)]), Env::dual(&[("x", 0)]), 10_000) {
        Err(e) => println!("{bad}: {e}"),
        Ok(_) => println!("{bad}: unexpectedly terminated"),
    }
    Ok(())
}
