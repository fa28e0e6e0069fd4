//! Batch entry points behind the `dialectica` binary. Each subcommand takes
//! file contents and options and returns a [`Report`]; the binary only
//! reads files, prints and exits with [`Report::exit_code`].

pub mod report;
pub mod selftest;
pub mod workspace;

use thiserror::Error;

use crate::check::{Budget, CheckError, Generator};
use crate::dhl::script::parse_script_with;
use crate::dhl::{synthesize, verify_triple, DhlError, Synthesis};
use crate::kernel::sexpr::ParseError;
use crate::kernel::syntax::{term_to_string, Symbols};
use crate::kernel::types::display_seq;
use crate::logic::syntax::{formula_to_string, parse_formula_document};
use crate::logic::{signature, translate as dialectica_translate};
use crate::loopd::{
    check_contracts, denote, gradient, parse_command, run as machine_run, Command, Contract, Env, LoopError, StateModel, TripleBudget, VecR, Vector,
};

pub use report::{digest, Outcome, Report, Verdict};
pub use selftest::selftest;
pub use workspace::{Model, Workspace};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Dhl(#[from] DhlError),
    #[error(transparent)]
    Loop(#[from] LoopError),
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error("{0}")]
    Usage(String),
}

/// Budget flags layered over the workspace file.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub workspace: Workspace,
    pub budget_nat: Option<u64>,
    pub fn_depth: Option<usize>,
    pub seed: Option<u64>,
    pub trace: bool,
}

impl Options {
    pub fn budget(&self) -> Budget {
        let mut b = self.workspace.budget();
        if let Some(n) = self.budget_nat {
            b.nat_max = n;
        }
        if let Some(d) = self.fn_depth {
            b.fn_depth = d;
        }
        if let Some(s) = self.seed {
            b.seed = s;
        }
        b
    }

    fn fingerprint(&self) -> String {
        let b = self.budget();
        format!(
            "nat_max={} fn_depth={} seed={} max_instances={} tables={} fuel={} trace={}",
            b.nat_max, b.fn_depth, b.seed, b.max_instances, b.tables, b.fuel, self.trace
        )
    }

    fn report(&self, sub: &str, inputs: &[&str]) -> Report {
        let fp = self.fingerprint();
        let mut parts: Vec<&[u8]> = vec![sub.as_bytes(), fp.as_bytes()];
        parts.extend(inputs.iter().map(|s| s.as_bytes()));
        Report::new(sub, digest(&parts), self.budget().seed)
    }
}

/// Signature and matrix of every formula in a formula file.
pub fn translate(src: &str, opts: &Options) -> Result<Report, CliError> {
    let mut report = opts.report("translate", &[src]);
    let mut symbols = opts.workspace.symbols()?;
    let formulas = parse_formula_document(src, &mut symbols)?;
    for p in &formulas {
        let sig = signature(p);
        let (w, c, m) = dialectica_translate(p);
        let show = |bs: &[(crate::kernel::Name, crate::kernel::Type)]| {
            bs.iter().map(|(n, t)| format!("({n} {t})")).collect::<Vec<_>>().join(" ")
        };
        report.line(format!("formula: {}", formula_to_string(p)));
        report.line(format!("witnesses: {}", display_seq(&sig.witnesses)));
        report.line(format!("counters: {}", display_seq(&sig.counters)));
        report.line(format!("witness-vars: {}", show(&w)));
        report.line(format!("counter-vars: {}", show(&c)));
        report.line(format!("matrix: {}", formula_to_string(&m)));
    }
    Ok(report)
}

fn synthesize_script(src: &str, symbols: Symbols, budget: Budget) -> Result<Synthesis, CliError> {
    let script = parse_script_with(src, symbols)?;
    Ok(synthesize(&script.root, Generator::new(budget))?)
}

fn realizer_lines(report: &mut Report, s: &Synthesis) {
    let show = |ts: &[crate::kernel::Term]| ts.iter().map(term_to_string).collect::<Vec<_>>();
    report.line(format!("conclusion: {}", s.resolved));
    for (i, t) in show(&s.resolved.forward).into_iter().enumerate() {
        report.line(format!("forward[{i}]: {t}"));
    }
    for (i, t) in show(&s.resolved.backward).into_iter().enumerate() {
        report.line(format!("backward[{i}]: {t}"));
    }
    for e in &s.epsilons {
        report.line(format!("epsilon {}: {}", e.name, show(&e.value).join(", ")));
    }
}

/// Synthesizes a derivation script, then tests every side condition and the
/// conclusion's soundness obligation.
pub fn check(src: &str, opts: &Options) -> Result<Report, CliError> {
    let mut report = opts.report("check", &[src]);
    let budget = opts.budget();
    let s = synthesize_script(src, opts.workspace.symbols()?, budget.clone())?;
    realizer_lines(&mut report, &s);
    for side in &s.side_conditions {
        report.push(Verdict::from_side_condition(side));
    }
    let r = verify_triple(&s.resolved, &Generator::new(budget))?;
    report.push(Verdict::from_check("conclusion", &r));
    Ok(report)
}

/// Synthesizes a derivation script and prints its realizers, verifying only
/// the conclusion.
pub fn extract(src: &str, opts: &Options) -> Result<Report, CliError> {
    let mut report = opts.report("extract", &[src]);
    let budget = opts.budget();
    let s = synthesize_script(src, opts.workspace.symbols()?, budget.clone())?;
    realizer_lines(&mut report, &s);
    s.resolved.check()?;
    report.push(Verdict::simple("realizer types", &s.resolved.to_string(), true, "PASS (syntactic)"));
    let r = verify_triple(&s.resolved, &Generator::new(budget))?;
    report.push(Verdict::from_check("conclusion", &r));
    if s.any_assumed() {
        report.push(Verdict {
            outcome: Outcome::Assumed,
            ..Verdict::simple("derivation", "", true, "ASSUMED side conditions present")
        });
    }
    Ok(report)
}

/// Values of a literal's components laid out on a small grid, at most
/// `limit` points.
fn env_grid(template: &Env, nat_max: u64, limit: usize) -> Vec<Env> {
    let keys: Vec<&String> = template.vals.keys().collect();
    let mut top = nat_max;
    while top > 0 && (top + 1).checked_pow(keys.len() as u32).is_none_or(|n| n > limit as u64) {
        top -= 1;
    }
    let mut out = vec![Vec::new()];
    for _ in &keys {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u64>| (0..=top).map(move |v| [p.clone(), vec![v]].concat()))
            .collect();
    }
    out.into_iter()
        .map(|vals| Env {
            sort: template.sort,
            vals: keys.iter().map(|k| (*k).clone()).zip(vals).collect(),
        })
        .collect()
}

fn vec_grid(template: &Vector, limit: usize) -> Vec<Vector> {
    let mut pts = vec![Vec::new()];
    for _ in &template.data {
        pts = pts
            .into_iter()
            .flat_map(|p: Vec<f64>| (-2..=2).map(move |v| [p.clone(), vec![v as f64]].concat()))
            .take(limit)
            .collect();
    }
    pts.into_iter()
        .map(|data| Vector {
            sort: template.sort,
            data,
        })
        .collect()
}

struct RunInput<'a, M: StateModel> {
    model: &'a M,
    command: &'a Command,
    state: M::S,
    dual: M::T,
    grid: (Vec<M::S>, Vec<M::T>),
}

fn run_model<M: StateModel>(input: RunInput<'_, M>, contracts: &[Contract], opts: &Options, report: &mut Report) -> Result<(), CliError> {
    let RunInput {
        model,
        command,
        state,
        dual,
        grid,
    } = input;
    let budget = opts.budget();
    match machine_run(model, command, state.clone(), dual.clone(), budget.fuel) {
        Ok((s, t, trace)) => {
            report.line(format!("state: {s}"));
            report.line(format!("dual: {t}"));
            report.line(format!("events: {} forward, {} backward", trace.forward_count(), trace.backward_count()));
            if opts.trace {
                report.output.extend(trace.events.iter().map(|e| e.to_string()));
            }
            let (ds, dt) = denote(model, command, &state, &dual, budget.fuel.saturating_mul(10))?;
            let agree = model.eq_state(&ds, &s) && model.eq_dual(&dt, &t);
            let detail = if agree {
                "PASS (machine and kernel decomposition agree)".to_string()
            } else {
                format!("FAIL (kernel gives {ds} and {dt})")
            };
            report.push(Verdict::simple("decomposition", &command.to_string(), agree, &detail));
        }
        Err(e @ (LoopError::DescentViolation { .. } | LoopError::FuelExhausted)) => {
            report.push(Verdict::simple("execution", &command.to_string(), false, &format!("FAIL ({e})")));
        }
        Err(e) => return Err(e.into()),
    }
    let used: Vec<&str> = command.primitives();
    let relevant: Vec<Contract> = contracts.iter().filter(|k| used.contains(&k.prim.as_str())).cloned().collect();
    let tb = TripleBudget {
        fuel: budget.fuel,
        max_instances: budget.max_instances as usize,
        seed: budget.seed,
    };
    for r in check_contracts(model, &relevant, &grid.0, &grid.1, &tb)? {
        let label = r.label.clone();
        report.push(Verdict::from_check(&label, &r));
    }
    Ok(())
}

/// Runs a command file forward and backward from the given literals.
pub fn run(src: &str, state: &str, dual: &str, opts: &Options) -> Result<Report, CliError> {
    let mut report = opts.report("run", &[src, state, dual]);
    let command = parse_command(src)?;
    let contracts = opts.workspace.loop_contracts()?;
    report.line(format!("command: {command}"));
    match opts.workspace.model(None) {
        Model::Nat(m) => {
            let (s, t) = (m.parse_state(state)?, m.parse_dual(dual)?);
            let n = opts.budget().nat_max;
            let grid = (env_grid(&s, n, 64), env_grid(&t, n, 64));
            run_model(
                RunInput {
                    model: &m,
                    command: &command,
                    state: s,
                    dual: t,
                    grid,
                },
                &contracts,
                opts,
                &mut report,
            )?;
        }
        Model::Vec(_) => {
            let dim = serde_json::from_str::<Vec<f64>>(state.trim()).map(|v| v.len()).ok();
            let m = match opts.workspace.model(dim) {
                Model::Vec(m) => m,
                Model::Nat(_) => unreachable!(),
            };
            let (s, t) = (m.parse_state(state)?, m.parse_dual(dual)?);
            let grid = (vec_grid(&s, 64), vec_grid(&t, 64));
            run_model(
                RunInput {
                    model: &m,
                    command: &command,
                    state: s,
                    dual: t,
                    grid,
                },
                &contracts,
                opts,
                &mut report,
            )?;
        }
    }
    Ok(report)
}

/// Relative gap used against finite differences: `|a - b| / max(1, |a|, |b|)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

pub const FD_TOLERANCE: f64 = 1e-5;

/// `covector · J(point)` by a backward pass; also compared against central
/// finite differences of `x ↦ covector · C+(x)`.
pub fn grad(src: &str, point: &str, covector: Option<&str>, opts: &Options) -> Result<Report, CliError> {
    let mut report = opts.report("grad", &[src, point, covector.unwrap_or("")]);
    let command = parse_command(src)?;
    let parse = |lit: &str| {
        serde_json::from_str::<Vec<f64>>(lit.trim()).map_err(|e| LoopError::Literal {
            literal: lit.to_string(),
            reason: e.to_string(),
        })
    };
    let x = parse(point)?;
    let seed = match covector {
        Some(c) => parse(c)?,
        None => vec![1.0; x.len()],
    };
    let model = VecR::new(x.len());
    let fuel = opts.budget().fuel;
    let g = gradient(&model, &command, &x, &seed, fuel)?;
    report.line(format!("command: {command}"));
    report.line(format!("gradient: {}", Vector::dual(g.clone())));
    let fd = finite_differences(&model, &command, &x, &seed, fuel)?;
    let worst = g.iter().zip(&fd).map(|(a, b)| relative_gap(*a, *b)).fold(0.0, f64::max);
    let ok = worst <= FD_TOLERANCE;
    let detail = format!(
        "{} (central differences {}, relative gap {worst:.1e}, tolerance {FD_TOLERANCE:.0e})",
        if ok { "PASS" } else { "FAIL" },
        Vector::dual(fd)
    );
    report.push(Verdict::simple("finite differences", &command.to_string(), ok, &detail));
    Ok(report)
}

/// Central differences of `x ↦ seed · C+(x)` with a step scaled to `x`.
pub fn finite_differences(model: &VecR, c: &Command, x: &[f64], seed: &[f64], fuel: u64) -> Result<Vec<f64>, LoopError> {
    let f = |p: Vec<f64>| -> Result<f64, LoopError> {
        let out = crate::loopd::forward_run(model, c, Vector::state(p), fuel)?;
        Ok(out.state.data.iter().zip(seed).map(|(a, b)| a * b).sum())
    };
    (0..x.len())
        .map(|i| {
            let h = 1e-5 * x[i].abs().max(1.0);
            let (mut up, mut down) = (x.to_vec(), x.to_vec());
            up[i] += h;
            down[i] -= h;
            Ok((f(up)? - f(down)?) / (2.0 * h))
        })
        .collect()
}
