use super::subst::{alpha_eq, substitute_one};
use super::term::Term;

/// Budget of beta steps before normalization gives up and returns what it
/// has; realizers are small, so this only guards against blowup.
const BETA_BUDGET: usize = 20_000;

/// Beta-normal form under binders, with conditionals on literal numerals
/// resolved. Recursors are left folded.
pub fn normalize(t: &Term) -> Term {
    let mut budget = BETA_BUDGET;
    nf(t, &mut budget)
}

pub fn normalize_all(ts: &[Term]) -> Vec<Term> {
    ts.iter().map(normalize).collect()
}

/// Alpha-equality of beta-normal forms.
pub fn nf_eq(a: &Term, b: &Term) -> bool {
    alpha_eq(&normalize(a), &normalize(b))
}

fn nf(t: &Term, budget: &mut usize) -> Term {
    match t {
        Term::App(f, a) => {
            let fv = nf(f, budget);
            if let Term::Lam(x, _, body) = &fv {
                if *budget > 0 {
                    *budget -= 1;
                    let r = substitute_one(body, x, a);
                    return nf(&r, budget);
                }
            }
            Term::app(fv, nf(a, budget))
        }
        Term::Lam(x, ty, b) => Term::Lam(x.clone(), ty.clone(), Box::new(nf(b, budget))),
        Term::Suc(a) => Term::suc(nf(a, budget)),
        Term::Ite(b, s, e) => {
            let bv = nf(b, budget);
            match bv.as_numeral() {
                Some(0) => nf(s, budget),
                Some(_) => nf(e, budget),
                None => Term::ite(bv, nf(s, budget), nf(e, budget)),
            }
        }
        Term::WhileRec {
            relation,
            guard,
            step,
            result,
            component,
        } => Term::WhileRec {
            relation: relation.clone(),
            guard: Box::new(nf(guard, budget)),
            step: step.iter().map(|s| nf(s, budget)).collect(),
            result: result.clone(),
            component: *component,
        },
        Term::Var(..) | Term::Zero | Term::Rec { .. } | Term::Const(_) | Term::Opaque(_) => {
            t.clone()
        }
    }
}
