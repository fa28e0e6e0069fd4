//! Reverse-mode differentiation as the backward pass of a LOOP_D program
//! over real vectors, checked against central differences.

use dialectica::cli::{finite_differences, relative_gap};
use dialectica::loopd::{gradient, parse_command, VecR};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = VecR::new(2);
    let c = parse_command("(seq (prim mul:0:1) (seq (prim square:0) (prim shift:1:3)))")?;
    let point = [1.5, -0.5];
    for seed in [[1.0, 0.0], [0.0, 1.0]] {
        let g = gradient(&m, &c, &point, &seed, 10_000)?;
        let fd = finite_differences(&m, &c, &point, &seed, 10_000)?;
        println!("seed {seed:?}: backward {g:?}, differences {fd:?}, gap {:.1e}", g.iter().zip(&fd).map(|(a, b)| relative_gap(*a, *b)).fold(0.0, f64::max));
    }
    Ok(())
}
