mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::{random_expr, random_spec, rng};
use upds_cli::model::parse_model;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn upds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upds"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn member_exit_codes() {
    let e1 = fixture("e1.upds");
    let e1 = e1.to_str().unwrap();
    let yes = upds(&["member", e1, "--init", "C1", "--config", "p': a ^ bot"]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&yes.stdout).trim(), "true");
    let no = upds(&["member", e1, "--init", "C1", "--config", "p': b ^ bot"]);
    assert_eq!(no.status.code(), Some(1));
}

#[test]
fn errors_exit_above_two() {
    let e1 = fixture("e1.upds");
    let e1 = e1.to_str().unwrap();
    let bad_set = upds(&["member", e1, "--init", "Nope", "--config", "p: ^ x"]);
    assert_eq!(bad_set.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad_set.stderr).contains("Nope"));
    let usage = upds(&["member", e1]);
    assert_eq!(usage.status.code(), Some(3));
    let missing = upds(&["member", "/nonexistent.upds", "--init", "C", "--config", "p: ^"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn oracle_lists_reachable() {
    let e2 = fixture("e2.upds");
    let out = upds(&["oracle", e2.to_str().unwrap(), "--init", "C2", "--depth", "2", "--init-size", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l == "p: ^ a b"));
    assert!(text.lines().any(|l| l == "p: a ^ b"));
}

#[test]
fn random_models_round_trip() {
    for seed in 0..100 {
        let mut r = rng(seed);
        let spec = random_spec(&mut r);
        let mut text = format!("states {}\nalphabet {}\n", spec.states().join(" "), spec.symbols().join(" "));
        for id in spec.rule_ids() {
            let rule = spec.rule(id);
            let mut line = format!(
                "rule {} {} -> {}",
                spec.state_name(rule.from),
                spec.symbol_name(rule.read),
                spec.state_name(rule.to)
            );
            for s in rule.action.written() {
                line.push(' ');
                line.push_str(spec.symbol_name(s));
            }
            text.push_str(&line);
            text.push('\n');
        }
        text.push_str(&format!("set S {}   {}\n", spec.states()[0], random_expr(&mut r, &spec)));
        let m = parse_model(&text).unwrap();
        assert_eq!(m.spec, spec);
        let again = parse_model(&m.to_string()).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.to_string(), m.to_string());
    }
}
