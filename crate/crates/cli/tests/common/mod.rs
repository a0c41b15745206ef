#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use upds_core::fsa::{compile_regex, ConfigAutomaton, Nfa};
use upds_core::upperapprox::TraceAutomaton;
use upds_core::{Action, Configuration, Rule, RuleId, State, Symbol, UpdsSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// At most 3 states, 3 symbols and 6 rules.
pub fn random_spec(rng: &mut ChaCha8Rng) -> UpdsSpec {
    let n_states = rng.gen_range(1..=3);
    let n_syms = rng.gen_range(1..=3);
    let states: Vec<String> = (0..n_states).map(|i| format!("p{i}")).collect();
    let syms: Vec<String> = (0..n_syms).map(|i| ["a", "b", "c"][i].to_string()).collect();
    let mut spec = UpdsSpec::new(&states, &syms).unwrap();
    let n_rules = rng.gen_range(0..=6);
    for _ in 0..n_rules {
        let mut sym = || Symbol(rng.gen_range(0..n_syms));
        let (read, b, c) = (sym(), sym(), sym());
        let action = match rng.gen_range(0..3) {
            0 => Action::Pop,
            1 => Action::Switch(b),
            _ => Action::Push(b, c),
        };
        let rule = Rule {
            from: State(rng.gen_range(0..n_states)),
            read,
            to: State(rng.gen_range(0..n_states)),
            action,
        };
        if !spec.rules().contains(&rule) {
            spec.add_rule(rule).unwrap();
        }
    }
    spec
}

fn word(rng: &mut ChaCha8Rng, names: &[String], min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n)
        .map(|_| names.choose(rng).unwrap().clone())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A small random boundary expression: words, stars and alternatives.
pub fn random_expr(rng: &mut ChaCha8Rng, spec: &UpdsSpec) -> String {
    let names = spec.symbols();
    let upper = match rng.gen_range(0..4) {
        0 => String::new(),
        1 => word(rng, names, 1, 2),
        2 => format!("( {} ) *", word(rng, names, 1, 2)),
        _ => format!("{} | {}", word(rng, names, 1, 1), word(rng, names, 1, 1)),
    };
    let upper = if upper.contains('|') { format!("( {upper} )") } else { upper };
    let lower = match rng.gen_range(0..3) {
        0 => word(rng, names, 1, 2),
        1 => format!("{} ( {} ) *", word(rng, names, 1, 1), word(rng, names, 1, 1)),
        _ => format!("{} {}", word(rng, names, 1, 1), word(rng, names, 0, 1)),
    };
    format!("{upper} ^ {lower}")
}

/// One or two slices, each from a random expression.
pub fn random_set(rng: &mut ChaCha8Rng, spec: &UpdsSpec) -> ConfigAutomaton {
    let mut ca = ConfigAutomaton::empty(spec);
    let resolve = |n: &str| spec.symbol_id(n).ok();
    for _ in 0..rng.gen_range(1..=2) {
        let p = State(rng.gen_range(0..spec.num_states()));
        let expr = random_expr(rng, spec);
        ca.add_to_component(p, &compile_regex(&expr, &resolve).unwrap());
    }
    ca.normalized()
}

/// A random meaningful trace automaton with at most 5 states and 8 edges,
/// plus an origin with empty upper stack in the state of its initial state.
pub fn random_trace_automaton(rng: &mut ChaCha8Rng, spec: &UpdsSpec) -> (TraceAutomaton, Configuration) {
    let n = rng.gen_range(1..=5);
    let owner: Vec<State> = (0..n).map(|_| State(rng.gen_range(0..spec.num_states()))).collect();
    let mut nfa: Nfa<RuleId> = Nfa::new();
    nfa.add_states(n);
    nfa.set_initial(0);
    let ids: Vec<RuleId> = spec.rule_ids().collect();
    let mut edges = 0;
    for _ in 0..40 {
        if edges == 8 || ids.is_empty() {
            break;
        }
        let id = *ids.choose(rng).unwrap();
        let r = spec.rule(id);
        let from: Vec<usize> = (0..n).filter(|&q| owner[q] == r.from).collect();
        let to: Vec<usize> = (0..n).filter(|&q| owner[q] == r.to).collect();
        if let (Some(&q), Some(&t)) = (from.choose(rng), to.choose(rng)) {
            if nfa.add_edge(q, Some(id), t) {
                edges += 1;
            }
        }
    }
    let lower_len = rng.gen_range(0..=2);
    let lower = (0..lower_len).map(|_| Symbol(rng.gen_range(0..spec.num_symbols()))).collect();
    let origin = Configuration::new(owner[0], Vec::new(), lower);
    (TraceAutomaton::new(spec, nfa, owner).unwrap(), origin)
}
