//! Total-correctness triples [P] C [Q] for LOOP_D, read through the
//! backward pass, and primitive contracts from a workspace file.

use dialectica::cli::Workspace;
use dialectica::loopd::{check_contracts, check_loopd_triple, parse_command, parse_pred, Env, NatEnv, TripleBudget};

const WORKSPACE: &str = r#"
[[contract]]
prim = "dec:x"
pre = "(ge x 1)"
post = "(ge (add x 1) 1)"

[[contract]]
prim = "inc:x"
pre = "(le x 4)"
post = "(le x 5)"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = NatEnv::new();
    let states: Vec<Env> = (0..8).map(|x| Env::state(&[("x", x)])).collect();
    let duals: Vec<Env> = (0..3).map(|x| Env::dual(&[("x", x)])).collect();
    let budget = TripleBudget::default();

    let c = parse_command("(while (lt x) (ne x 0) (prim dec:x))")?;
    for (pre, post) in [("(le x 5)", "(eq x 0)"), ("true", "(eq x 1)")] {
        let r = check_loopd_triple(&m, &parse_pred(pre)?, &c, &parse_pred(post)?, &states, &duals, &budget)?;
        println!("[{pre}] {c} [{post}]: {}", r.verdict());
    }

    let ws = Workspace::from_toml(WORKSPACE)?;
    for r in check_contracts(&m, &ws.loop_contracts()?, &states, &duals, &budget)? {
        println!("{}: {}", r.label, r.verdict());
    }
    Ok(())
}
