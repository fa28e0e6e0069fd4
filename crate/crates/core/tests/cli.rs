//! The binary end to end: exit codes, report formats and repeatability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialectica")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn script(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scripts").join(name).display().to_string()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn structured(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "structured"];
    all.extend_from_slice(args);
    let o = bin(&all);
    (code(&o), serde_json::from_str(&stdout(&o)).unwrap())
}

#[test]
fn shipped_scripts_exit_as_documented() {
    for (name, want) in [("ax_id.dhl", 0), ("min_principle.dhl", 0), ("assumed_cons.dhl", 3)] {
        let o = bin(&["check", &script(name)]);
        assert_eq!(code(&o), want, "{name}: {}", stdout(&o));
    }
    let o = bin(&["extract", &script("min_principle.dhl")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("whilerec"));
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(code(&bin(&["frobnicate"])), 1);
    assert_eq!(code(&bin(&["check", "/no/such/file.dhl"])), 1);
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.fml", "(exists (x nat) (eq (suc suc) x))");
    let o = bin(&["translate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"), "errors carry a position");
}

#[test]
fn translation_report() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.fml", "(exists (x nat) (eq x x))");
    let (c, v) = structured(&["translate", f.to_str().unwrap()]);
    assert_eq!(c, 0);
    let lines: Vec<&str> = v["output"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert!(lines.contains(&"witnesses: [nat]"));
    assert!(lines.contains(&"counters: []"));
}

#[test]
fn countdown_run_and_trace() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.loop", "(while (lt x) (ne x 0) (prim dec:x))");
    let (code, v) = structured(&["run", c.to_str().unwrap(), "--state", "{x:5}", "--dual", "{x:0}", "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(v["exit_code"], 0);
    let lines: Vec<&str> = v["output"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
    assert!(lines.contains(&"state: {x:0}"));
    assert_eq!(lines.iter().filter(|l| l.starts_with("FWD\t")).count(), 5);
    assert_eq!(lines.iter().filter(|l| l.starts_with("BWD\t")).count(), 5);
}

#[test]
fn runtime_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "up.loop", "(while (lt x) (ne x 0) (prim inc:x))");
    let o = bin(&["run", c.to_str().unwrap(), "--state", "{x:2}", "--dual", "{x:0}"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("descent"));
}

#[test]
fn gradients_by_the_backward_pass() {
    let dir = TempDir::new().unwrap();
    for (src, point, want) in [
        ("(prim square)", "[3.0]", "gradient: [6.0]"),
        ("(seq (prim add1) (prim square))", "[1.0]", "gradient: [4.0]"),
        ("skip", "[2.0]", "gradient: [1.0]"),
    ] {
        let f = write(&dir, "g.loop", src);
        let o = bin(&["grad", f.to_str().unwrap(), "--point", point]);
        assert_eq!(code(&o), 0, "{src}");
        assert!(stdout(&o).contains(want), "{src}: {}", stdout(&o));
    }
}

#[test]
fn workspace_budget_changes_the_instance_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "ws.toml", "[budget]\nnat_max = 3\n");
    let (_, small) = structured(&["--config", cfg.to_str().unwrap(), "check", &script("ax_id.dhl")]);
    let (_, default) = structured(&["check", &script("ax_id.dhl")]);
    let count = |v: &Value| v["verdicts"].as_array().unwrap().iter().map(|x| x["instances"].as_u64().unwrap()).max();
    assert!(count(&small) < count(&default));
    let broken = write(&dir, "broken.toml", "[budget]\nnat_max = \"many\"\n");
    assert_eq!(code(&bin(&["--config", broken.to_str().unwrap(), "selftest"])), 1);
}

#[test]
fn reports_repeat_byte_for_byte() {
    let a = bin(&["--seed", "11", "selftest"]);
    let b = bin(&["--seed", "11", "selftest"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let a = bin(&["--format", "structured", "check", &script("min_principle.dhl")]);
    let b = bin(&["--format", "structured", "check", &script("min_principle.dhl")]);
    assert_eq!(a.stdout, b.stdout);
}
