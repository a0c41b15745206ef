//! Classic pushdown reachability on lower stacks.
//!
//! Both saturations work on a single P-automaton whose first `|P|` states
//! stand for the control states. Input slices are copied in behind them so
//! that control states never have incoming edges.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::fsa::Nfa;
use crate::oracle::LowerConfig;
use crate::system::{Action, RuleKind, State, Symbol, UpdsSpec};

/// A regular set of pushdown configurations: one automaton over Γ per
/// control state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowerAutomaton {
    components: Vec<Nfa<Symbol>>,
}

impl LowerAutomaton {
    pub fn empty(spec: &UpdsSpec) -> Self {
        LowerAutomaton {
            components: vec![Nfa::new(); spec.num_states()],
        }
    }

    pub fn from_components(components: Vec<Nfa<Symbol>>) -> Self {
        LowerAutomaton { components }
    }

    pub fn from_configs<'a>(spec: &UpdsSpec, configs: impl IntoIterator<Item = &'a LowerConfig>) -> Self {
        let mut out = Self::empty(spec);
        for (p, w) in configs {
            let c = &mut out.components[p.0];
            *c = c.union(&Nfa::word(w));
        }
        out
    }

    pub fn component(&self, p: State) -> &Nfa<Symbol> {
        &self.components[p.0]
    }

    pub fn components(&self) -> &[Nfa<Symbol>] {
        &self.components
    }

    pub fn num_states(&self) -> usize {
        self.components.len()
    }

    pub fn accepts(&self, p: State, stack: &[Symbol]) -> bool {
        self.components.get(p.0).is_some_and(|c| c.accepts(stack))
    }

    /// All accepted configurations with stack length at most `max`.
    pub fn configs_up_to(&self, max: usize) -> BTreeSet<LowerConfig> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(p, c)| c.words_up_to(max).into_iter().map(move |w| (State(p), w)))
            .collect()
    }
}

/// The shared P-automaton: states `0..n` are the control states.
fn combine(spec: &UpdsSpec, init: &LowerAutomaton) -> Nfa<Symbol> {
    let n = spec.num_states();
    let mut a: Nfa<Symbol> = Nfa::new();
    a.add_states(n);
    for p in 0..n {
        let Some(comp) = init.components.get(p) else {
            continue;
        };
        let comp = comp.remove_epsilons().trim();
        let off = a.embed(&comp);
        for &f in comp.finals() {
            a.set_final(f + off);
        }
        for &i in comp.initial() {
            if comp.is_final(i) {
                a.set_final(p);
            }
            for (l, t) in comp.out(i) {
                a.add_edge(p, *l, t + off);
            }
        }
    }
    a
}

/// Cuts the shared automaton back into one slice per control state.
fn split(a: &Nfa<Symbol>, n: usize) -> LowerAutomaton {
    let components = (0..n)
        .map(|p| {
            let mut c = a.clone();
            c.set_initial(p);
            c.remove_epsilons().trim().merge_equivalent()
        })
        .collect();
    LowerAutomaton { components }
}

/// `post*` under pushdown semantics.
pub fn pds_post_star(spec: &UpdsSpec, init: &LowerAutomaton) -> LowerAutomaton {
    pds_post_star_with(spec, init, |_| true)
}

/// `post*` using only the rules whose kind satisfies `keep`.
pub fn pds_post_star_with(
    spec: &UpdsSpec,
    init: &LowerAutomaton,
    keep: impl Fn(RuleKind) -> bool,
) -> LowerAutomaton {
    let n = spec.num_states();
    let base = combine(spec, init);
    let mut a: Nfa<Symbol> = Nfa::new();
    a.add_states(base.num_states());
    for &f in base.finals() {
        a.set_final(f);
    }

    // one auxiliary state per push rule, named by rule index
    let mut aux = vec![usize::MAX; spec.rules().len()];
    for id in spec.rule_ids() {
        let r = spec.rule(id);
        if matches!(r.action, Action::Push(..)) && keep(r.kind()) {
            aux[id.0] = a.add_state();
        }
    }

    type Edge = (usize, Option<Symbol>, usize);
    let mut rel: HashSet<Edge> = HashSet::new();
    let mut out_of: Vec<Vec<(Option<Symbol>, usize)>> = vec![Vec::new(); a.num_states()];
    let mut eps_into: Vec<Vec<usize>> = vec![Vec::new(); a.num_states()];
    let mut work: VecDeque<Edge> = VecDeque::new();

    let mut insert = |e: Edge,
                      a: &mut Nfa<Symbol>,
                      out_of: &mut Vec<Vec<(Option<Symbol>, usize)>>,
                      eps_into: &mut Vec<Vec<usize>>|
     -> bool {
        if !rel.insert(e) {
            return false;
        }
        a.add_edge(e.0, e.1, e.2);
        out_of[e.0].push((e.1, e.2));
        if e.1.is_none() {
            eps_into[e.2].push(e.0);
        }
        true
    };

    for (q, l, t) in base.edges() {
        if q < n {
            work.push_back((q, *l, t));
        } else {
            insert((q, *l, t), &mut a, &mut out_of, &mut eps_into);
        }
    }

    while let Some(e) = work.pop_front() {
        if !insert(e, &mut a, &mut out_of, &mut eps_into) {
            continue;
        }
        let (q, label, t) = e;
        match label {
            Some(g) if q < n => {
                for id in spec.rules_from(State(q), g) {
                    let r = spec.rule(id);
                    if !keep(r.kind()) {
                        continue;
                    }
                    let p2 = r.to.0;
                    match r.action {
                        Action::Pop => work.push_back((p2, None, t)),
                        Action::Switch(b) => work.push_back((p2, Some(b), t)),
                        Action::Push(b, c) => {
                            let qr = aux[id.0];
                            work.push_back((p2, Some(b), qr));
                            if insert((qr, Some(c), t), &mut a, &mut out_of, &mut eps_into) {
                                for &src in &eps_into[qr].clone() {
                                    work.push_back((src, Some(c), t));
                                }
                            }
                        }
                    }
                }
            }
            None => {
                for &(l2, t2) in &out_of[t].clone() {
                    if l2.is_some() {
                        work.push_back((q, l2, t2));
                    }
                }
            }
            _ => {}
        }
    }
    split(&a, n)
}

/// `pre*` under pushdown semantics.
pub fn pds_pre_star(spec: &UpdsSpec, targets: &LowerAutomaton) -> LowerAutomaton {
    pds_pre_star_with(spec, targets, |_| true)
}

/// `pre*` using only the rules whose kind satisfies `keep`.
pub fn pds_pre_star_with(
    spec: &UpdsSpec,
    targets: &LowerAutomaton,
    keep: impl Fn(RuleKind) -> bool,
) -> LowerAutomaton {
    let n = spec.num_states();
    let mut a = combine(spec, targets);
    let rules: Vec<_> = spec
        .rule_ids()
        .map(|id| spec.rule(id))
        .filter(|r| keep(r.kind()))
        .collect();
    loop {
        let mut added = false;
        for r in &rules {
            let reached = a.run([r.to.0], &r.action.written());
            for q in reached {
                added |= a.add_edge(r.from.0, Some(r.read), q);
            }
        }
        if !added {
            break;
        }
    }
    split(&a, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{e1, e2};
    use crate::oracle::{oracle_pds_post, oracle_pds_pre};

    fn lower(spec: &UpdsSpec, p: &str, w: &[&str]) -> LowerConfig {
        (
            spec.state_id(p).unwrap(),
            w.iter().map(|s| spec.symbol_id(s).unwrap()).collect(),
        )
    }

    #[test]
    fn post_star_e1() {
        let spec = e1();
        let start = lower(&spec, "p", &["x", "bot"]);
        let post = pds_post_star(&spec, &LowerAutomaton::from_configs(&spec, [&start]));
        let (p, w) = lower(&spec, "p", &["a", "bot"]);
        assert!(post.accepts(p, &w));
        let (p, w) = lower(&spec, "p'", &["bot"]);
        assert!(post.accepts(p, &w));
        for k in 0..4 {
            let mut w = vec!["a"];
            w.extend(std::iter::repeat("b").take(k));
            w.push("bot");
            let (p, w) = lower(&spec, "p", &w);
            assert!(post.accepts(p, &w));
        }
        let (p, w) = lower(&spec, "p'", &["a", "bot"]);
        assert!(!post.accepts(p, &w));

        let exact = oracle_pds_post(&spec, [&start], 12, 6);
        for c in &exact {
            assert!(post.accepts(c.0, &c.1));
        }
        for c in post.configs_up_to(5) {
            assert!(exact.contains(&c), "{c:?}");
        }
    }

    #[test]
    fn no_rules_is_identity() {
        let spec = UpdsSpec::new(&["p", "q"], &["a", "b"]).unwrap();
        let set = [lower(&spec, "p", &["a", "b"]), lower(&spec, "q", &[])];
        let a = LowerAutomaton::from_configs(&spec, &set);
        let expect: BTreeSet<_> = set.iter().cloned().collect();
        assert_eq!(pds_post_star(&spec, &a).configs_up_to(4), expect);
        assert_eq!(pds_pre_star(&spec, &a).configs_up_to(4), expect);
    }

    #[test]
    fn pre_star_examples() {
        let spec = e2();
        let t = lower(&spec, "p", &["c"]);
        let pre = pds_pre_star(&spec, &LowerAutomaton::from_configs(&spec, [&t]));
        let (p, w) = lower(&spec, "p", &["c", "c"]);
        assert_eq!(pre.accepts(p, &w), {
            let targets: BTreeSet<_> = [t.clone()].into();
            oracle_pds_pre(&spec, &targets, 8, 2).contains(&(p, w.clone()))
        });

        let spec = e1();
        let t = lower(&spec, "p'", &["bot"]);
        let pre = pds_pre_star(&spec, &LowerAutomaton::from_configs(&spec, [&t]));
        let (p, w) = lower(&spec, "p", &["x", "bot"]);
        assert!(pre.accepts(p, &w));
    }

    #[test]
    fn empty_stack_targets() {
        let mut spec = UpdsSpec::new(&["p", "q"], &["a"]).unwrap();
        spec.add_rule_named("p", "a", "q", &[]).unwrap();
        let t = lower(&spec, "q", &[]);
        let pre = pds_pre_star(&spec, &LowerAutomaton::from_configs(&spec, [&t]));
        assert!(pre.accepts(State(0), &[Symbol(0)]));
        let s = lower(&spec, "p", &["a"]);
        let post = pds_post_star(&spec, &LowerAutomaton::from_configs(&spec, [&s]));
        assert!(post.accepts(State(1), &[]));
    }

    #[test]
    fn post_star_is_a_fixpoint() {
        let spec = e1();
        let start = lower(&spec, "p", &["x", "y", "x", "bot"]);
        let once = pds_post_star(&spec, &LowerAutomaton::from_configs(&spec, [&start]));
        let twice = pds_post_star(&spec, &once);
        assert_eq!(once.configs_up_to(6), twice.configs_up_to(6));
    }
}
