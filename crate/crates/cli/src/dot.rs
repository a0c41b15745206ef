//! Graphviz export. Nodes are numbered by state index and edges sorted, so
//! identical inputs give identical text.

use std::fmt::Write;

use upds_core::csgrammar::CsGrammar;
use upds_core::fsa::{ConfigAutomaton, Letter, Nfa, Zone};
use upds_core::upperapprox::TraceAutomaton;
use upds_core::{RuleId, UpdsSpec};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders `nfa` as a subgraph body; node ids are `{prefix}{index}`.
fn nfa_body<L: Clone + Eq + std::hash::Hash + Ord>(
    out: &mut String,
    nfa: &Nfa<L>,
    prefix: &str,
    node_label: impl Fn(usize) -> String,
    edge_label: impl Fn(&L) -> String,
) {
    for q in 0..nfa.num_states() {
        let shape = if nfa.is_final(q) { "doublecircle" } else { "circle" };
        let _ = writeln!(
            out,
            "  {prefix}{q} [label=\"{}\", shape={shape}];",
            escape(&node_label(q))
        );
    }
    for &i in nfa.initial() {
        let _ = writeln!(out, "  {prefix}init{i} [label=\"\", shape=point];");
        let _ = writeln!(out, "  {prefix}init{i} -> {prefix}{i};");
    }
    let mut edges: Vec<(usize, String, usize)> = nfa
        .edges()
        .map(|(q, l, t)| (q, l.as_ref().map_or("ε".to_string(), &edge_label), t))
        .collect();
    edges.sort();
    edges.dedup();
    for (q, l, t) in edges {
        let _ = writeln!(out, "  {prefix}{q} -> {prefix}{t} [label=\"{}\"];", escape(&l));
    }
}

pub fn nfa_dot<L: Clone + Eq + std::hash::Hash + Ord>(
    name: &str,
    nfa: &Nfa<L>,
    edge_label: impl Fn(&L) -> String,
) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", escape(name));
    nfa_body(&mut out, nfa, "n", |q| q.to_string(), edge_label);
    out.push_str("}\n");
    out
}

/// One cluster per control state; upper-zone letters are overlined.
pub fn config_automaton_dot(name: &str, spec: &UpdsSpec, ca: &ConfigAutomaton) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", escape(name));
    for p in spec.all_states() {
        let Some(comp) = ca.component(p) else { continue };
        let _ = writeln!(out, "  subgraph cluster_{} {{", p.0);
        let _ = writeln!(out, "  label=\"{}\";", escape(spec.state_name(p)));
        nfa_body(
            &mut out,
            comp.nfa(),
            &format!("s{}_", p.0),
            |q| match comp.zone(q) {
                Zone::Upper => format!("{q}↑"),
                Zone::Lower => q.to_string(),
            },
            |l| match l {
                Letter::Upper(s) => format!("{}\u{0305}", spec.symbol_name(*s)),
                Letter::Lower(s) => spec.symbol_name(*s).to_string(),
            },
        );
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

pub fn trace_automaton_dot(name: &str, spec: &UpdsSpec, at: &TraceAutomaton) -> String {
    let mut out = format!("digraph \"{}\" {{\n  rankdir=LR;\n", escape(name));
    nfa_body(
        &mut out,
        at.nfa(),
        "t",
        |q| format!("{q}: {}", spec.state_name(at.owner(q))),
        |id: &RuleId| format!("{}: {}", id.0, spec.rule_display(*id)),
    );
    out.push_str("}\n");
    out
}

/// One record node per production, in production order.
pub fn grammar_dot(name: &str, g: &CsGrammar) -> String {
    let mut out = format!("digraph \"{}\" {{\n  node [shape=box];\n", escape(name));
    for (i, p) in g.productions().iter().enumerate() {
        let _ = writeln!(
            out,
            "  r{i} [label=\"{} → {}\"];",
            escape(&g.form_display(&p.lhs)),
            escape(&g.form_display(&p.rhs))
        );
    }
    out.push_str("}\n");
    out
}
