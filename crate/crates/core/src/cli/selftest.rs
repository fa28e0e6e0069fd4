//! A fixed battery over the shipped scripts and small programs. The report
//! depends only on the options, so repeated runs print identical bytes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check, grad, run, translate, CliError, Options, Report, Verdict};
use crate::loopd::random::nat_command;
use crate::loopd::{denote, run as machine_run, Env, NatEnv, StateModel};

pub const SCRIPTS: [(&str, &str, i32); 3] = [
    ("ax_id.dhl", include_str!("../../scripts/ax_id.dhl"), 0),
    ("min_principle.dhl", include_str!("../../scripts/min_principle.dhl"), 0),
    ("assumed_cons.dhl", include_str!("../../scripts/assumed_cons.dhl"), 3),
];

fn field(r: &Report, key: &str) -> String {
    let prefix = format!("{key}: ");
    r.output
        .iter()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or("")
        .to_string()
}

fn expect(report: &mut Report, label: &str, found: String, want: &str) {
    let ok = found == want;
    let detail = if ok {
        format!("PASS ({found})")
    } else {
        format!("FAIL (expected {want}, found {found})")
    };
    report.push(Verdict::simple(label, want, ok, &detail));
}

pub fn selftest(opts: &Options) -> Result<Report, CliError> {
    let scripts: Vec<&str> = SCRIPTS.iter().map(|(_, s, _)| *s).collect();
    let mut report = opts.report("selftest", &scripts);

    let t = translate("(exists (x nat) (eq x x))", opts)?;
    expect(&mut report, "translate exists", format!("{} {}", field(&t, "witnesses"), field(&t, "counters")), "[nat] []");
    let t = translate(
        "(const p (-> S nat)) (const q (-> S nat)) \
         (imp (exists (s S) (eq (app p s) 0)) (exists (s S) (eq (app q s) 0)))",
        opts,
    )?;
    expect(&mut report, "translate implication", format!("{} {}", field(&t, "witnesses"), field(&t, "counters")), "[(-> S S)] [S]");

    for (name, src, code) in SCRIPTS {
        let r = check(src, opts)?;
        report.line(format!("check {name}: exit {}", r.exit_code));
        for l in r.output.iter().filter(|l| l.starts_with("forward") || l.starts_with("backward")) {
            report.line(format!("  {l}"));
        }
        expect(&mut report, &format!("check {name}"), format!("exit {}", r.exit_code), &format!("exit {code}"));
    }

    let r = run("skip", "{x:1}", "{x:0}", opts)?;
    expect(&mut report, "run skip", format!("{} {}", field(&r, "state"), field(&r, "dual")), "{x:1} {x:0}");
    let r = run("(while (lt x) (ne x 0) (prim dec:x))", "{x:5}", "{x:0}", opts)?;
    expect(&mut report, "run countdown", field(&r, "state"), "{x:0}");
    expect(&mut report, "countdown trace", field(&r, "events"), "5 forward, 5 backward");

    for (label, src, point, want) in [
        ("grad square", "(prim square)", "[3.0]", "[6.0]"),
        ("grad add1 then square", "(seq (prim add1) (prim square))", "[1.0]", "[4.0]"),
        ("grad skip", "skip", "[2.0]", "[1.0]"),
    ] {
        let g = grad(src, point, None, opts)?;
        expect(&mut report, label, field(&g, "gradient"), want);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.budget().seed);
    let m = NatEnv::new();
    let (mut agree, mut total) = (0, 0);
    for _ in 0..40 {
        let c = nat_command(&mut rng, 5, &["x", "y", "z"]);
        let s = Env::state(&[("x", 2), ("y", 3), ("z", 0)]);
        let t = Env::dual(&[("x", 1), ("y", 0), ("z", 2)]);
        let fuel = opts.budget().fuel;
        total += 1;
        let same = match (machine_run(&m, &c, s.clone(), t.clone(), fuel), denote(&m, &c, &s, &t, fuel)) {
            (Ok((s1, t1, _)), Ok((s2, t2))) => m.eq_state(&s1, &s2) && m.eq_dual(&t1, &t2),
            (Err(_), Err(_)) => true,
            _ => false,
        };
        agree += same as usize;
    }
    expect(&mut report, "machine against decomposition", format!("{agree}/{total}"), &format!("{total}/{total}"));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_and_repeats() {
        let a = selftest(&Options::default()).unwrap();
        assert_eq!(a.exit_code, 0, "{}", a.to_text());
        let b = selftest(&Options::default()).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }
}
