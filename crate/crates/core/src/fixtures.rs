//! The two small systems whose reachability sets are not regular.
//!
//! `e1` with initial set `c1 = {p} × {ε} × x(yx)*⊥`: forward reachability
//! produces upper stacks `a^{n+1} b^n` in state `p'`.
//!
//! `e2` with target set `c2 = {p} × (ab)* × {c}`: backward reachability
//! contains every `⟨p, b^n, c^{n+1}⟩`.

use crate::fsa::{compile_regex, ConfigAutomaton};
use crate::system::{RuleId, UpdsSpec};

pub const E1_SX: RuleId = RuleId(0);
pub const E1_SY: RuleId = RuleId(1);
pub const E1_C: RuleId = RuleId(2);
pub const E1_RA: RuleId = RuleId(3);
pub const E1_RB: RuleId = RuleId(4);
pub const E1_E: RuleId = RuleId(5);

pub const E2_C0: RuleId = RuleId(0);
pub const E2_C1: RuleId = RuleId(1);
pub const E2_RA: RuleId = RuleId(2);
pub const E2_RB: RuleId = RuleId(3);

pub const C1_EXPR: &str = "^ x (y x)* bot";
pub const C2_EXPR: &str = "(a b)* ^ c";

pub fn e1() -> UpdsSpec {
    let mut spec = UpdsSpec::new(&["p", "p'"], &["a", "b", "x", "y", "bot"]).unwrap();
    spec.add_rule_named("p", "x", "p", &["a"]).unwrap();
    spec.add_rule_named("p", "y", "p", &["b"]).unwrap();
    spec.add_rule_named("p", "a", "p", &["a", "b"]).unwrap();
    spec.add_rule_named("p", "a", "p", &[]).unwrap();
    spec.add_rule_named("p", "b", "p", &[]).unwrap();
    spec.add_rule_named("p", "bot", "p'", &["bot"]).unwrap();
    spec
}

pub fn e2() -> UpdsSpec {
    let mut spec = UpdsSpec::new(&["p"], &["a", "b", "c"]).unwrap();
    spec.add_rule_named("p", "c", "p", &["a", "b"]).unwrap();
    spec.add_rule_named("p", "c", "p", &["c", "b"]).unwrap();
    spec.add_rule_named("p", "a", "p", &[]).unwrap();
    spec.add_rule_named("p", "b", "p", &[]).unwrap();
    spec
}

fn single_slice(spec: &UpdsSpec, state: &str, expr: &str) -> ConfigAutomaton {
    let comp = compile_regex(expr, &|n: &str| spec.symbol_id(n).ok()).unwrap();
    let mut ca = ConfigAutomaton::empty(spec);
    ca.set_component(spec.state_id(state).unwrap(), comp);
    ca
}

pub fn c1(spec: &UpdsSpec) -> ConfigAutomaton {
    single_slice(spec, "p", C1_EXPR)
}

pub fn c2(spec: &UpdsSpec) -> ConfigAutomaton {
    single_slice(spec, "p", C2_EXPR)
}
