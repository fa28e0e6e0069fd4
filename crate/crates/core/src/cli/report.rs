//! Subcommand reports. Everything except the optional timing field is a
//! function of the inputs and the seed, so two runs print the same bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::check::{CheckReport, Counterexample, Method};
use crate::dhl::{SideCondition, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Counterexample,
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub label: String,
    pub obligation: String,
    pub outcome: Outcome,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub instances: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    pub fn from_check(label: &str, r: &CheckReport) -> Verdict {
        Verdict {
            label: label.to_string(),
            obligation: r.obligation.clone(),
            outcome: if r.passed() { Outcome::Pass } else { Outcome::Counterexample },
            detail: r.verdict(),
            method: Some(r.method),
            instances: r.instances,
            counterexample: r.counterexample.clone(),
        }
    }

    pub fn from_side_condition(s: &SideCondition) -> Verdict {
        let label = format!("{} {}", s.path, serde_json::to_value(s.kind).unwrap().as_str().unwrap_or(""));
        match &s.status {
            Status::PropertyTested(r) => Verdict {
                obligation: s.description.clone(),
                ..Verdict::from_check(&label, r)
            },
            Status::Syntactic => Verdict::simple(&label, &s.description, true, "PASS (syntactic)"),
            Status::Assumed => Verdict {
                outcome: Outcome::Assumed,
                ..Verdict::simple(&label, &s.description, true, "ASSUMED (not checked)")
            },
        }
    }

    /// A verdict decided directly, without a generated domain.
    pub fn simple(label: &str, obligation: &str, pass: bool, detail: &str) -> Verdict {
        Verdict {
            label: label.to_string(),
            obligation: obligation.to_string(),
            outcome: if pass { Outcome::Pass } else { Outcome::Counterexample },
            detail: detail.to_string(),
            method: None,
            instances: 0,
            counterexample: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub subcommand: String,
    /// SHA-256 over the input files and the effective options.
    pub inputs_digest: String,
    pub seed: u64,
    /// Subcommand output: signatures, realizers, states, traces.
    pub output: Vec<String>,
    pub verdicts: Vec<Verdict>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(subcommand: &str, inputs_digest: String, seed: u64) -> Report {
        Report {
            subcommand: subcommand.to_string(),
            inputs_digest,
            seed,
            output: Vec::new(),
            verdicts: Vec::new(),
            exit_code: 0,
            timing_ms: None,
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.output.push(s.into());
    }

    pub fn push(&mut self, v: Verdict) {
        self.verdicts.push(v);
        self.exit_code = self.exit_code();
    }

    /// 2 if anything failed, else 3 if anything was assumed, else 0.
    fn exit_code(&self) -> i32 {
        if self.verdicts.iter().any(|v| v.outcome == Outcome::Counterexample) {
            2
        } else if self.verdicts.iter().any(|v| v.outcome == Outcome::Assumed) {
            3
        } else {
            0
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "subcommand: {}\ninputs: sha256:{}\nseed: {}\n",
            self.subcommand, self.inputs_digest, self.seed
        );
        for l in &self.output {
            out.push_str(l);
            out.push('\n');
        }
        for v in &self.verdicts {
            out.push_str(&format!("[{}] {}: {}\n", outcome_tag(v.outcome), v.label, v.detail));
        }
        if let Some(ms) = self.timing_ms {
            out.push_str(&format!("timing: {ms} ms\n"));
        }
        out.push_str(&format!("exit: {}\n", self.exit_code));
        out
    }

    pub fn to_structured(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

fn outcome_tag(o: Outcome) -> &'static str {
    match o {
        Outcome::Pass => "PASS",
        Outcome::Counterexample => "FAIL",
        Outcome::Assumed => "ASSUMED",
    }
}
