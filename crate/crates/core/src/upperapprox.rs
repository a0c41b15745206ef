//! Regular over-approximation of forward reachability.
//!
//! A regular superset of the traces is turned into the set of upper stacks
//! those traces write (by saturation), and paired per control state with the
//! exact lower-stack reachability of the underlying pushdown system.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::csgrammar::single_origin;
use crate::error::{Error, Result};
use crate::fsa::{Component, ConfigAutomaton, Nfa};
use crate::pds::{pds_post_star, LowerAutomaton};
use crate::system::{upsilon, Action, Configuration, RuleId, State, Symbol, UpdsSpec};

/// An automaton over rule labels whose states are partitioned by control
/// state. All states are final.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceAutomaton {
    nfa: Nfa<RuleId>,
    owner: Vec<State>,
}

impl TraceAutomaton {
    /// Checks that every edge labelled `δ = (p, a) -> (p', w)` leaves a state
    /// of `p` and enters a state of `p'`, and makes every state final.
    pub fn new(spec: &UpdsSpec, nfa: Nfa<RuleId>, owner: Vec<State>) -> Result<Self> {
        if owner.len() != nfa.num_states() {
            return Err(Error::Precondition("owner table size mismatch".into()));
        }
        for (q, l, t) in nfa.edges() {
            let Some(id) = l else {
                return Err(Error::Precondition("trace automaton has an ε-edge".into()));
            };
            if id.0 >= spec.rules().len() {
                return Err(Error::Precondition(format!("unknown rule {}", id.0)));
            }
            let r = spec.rule(*id);
            if r.from != owner[q] || r.to != owner[t] {
                return Err(Error::Precondition(format!(
                    "edge {q} -> {t} labelled {} is not meaningful",
                    spec.rule_display(*id)
                )));
            }
        }
        let mut nfa = nfa;
        for q in 0..nfa.num_states() {
            nfa.set_final(q);
        }
        Ok(TraceAutomaton { nfa, owner })
    }

    pub fn nfa(&self) -> &Nfa<RuleId> {
        &self.nfa
    }

    pub fn owner(&self, q: usize) -> State {
        self.owner[q]
    }

    pub fn num_states(&self) -> usize {
        self.nfa.num_states()
    }

    pub fn accepts(&self, t: &[RuleId]) -> bool {
        self.nfa.accepts(t)
    }

    /// States reached by `t` from an initial state.
    pub fn run(&self, t: &[RuleId]) -> BTreeSet<usize> {
        self.nfa.run(self.nfa.initial().iter().copied(), t)
    }

    /// Every accepted sequence of length at most `max`, with its end state.
    pub fn sequences_up_to(&self, max: usize) -> Vec<(Vec<RuleId>, usize)> {
        let mut out = Vec::new();
        let mut layer: Vec<(Vec<RuleId>, usize)> =
            self.nfa.initial().iter().map(|&q| (Vec::new(), q)).collect();
        for len in 0..=max {
            out.extend(layer.iter().cloned());
            if len == max {
                break;
            }
            let mut next = Vec::new();
            for (t, q) in &layer {
                for (l, r) in self.nfa.out(*q) {
                    let mut t2 = t.clone();
                    t2.push(l.expect("labelled"));
                    next.push((t2, *r));
                }
            }
            layer = next;
        }
        out
    }
}

/// How traces are abstracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceAbstraction {
    /// Control states only.
    #[default]
    ControlGraph,
    /// Control state plus the last symbol known to be on top of the lower
    /// stack.
    TopOfStack,
}

/// A regular, meaningful, prefix-closed superset of the traces of `spec`
/// from `C`.
pub fn trace_overapprox(spec: &UpdsSpec, ca: &ConfigAutomaton) -> TraceAutomaton {
    trace_overapprox_with(spec, ca, TraceAbstraction::ControlGraph)
}

pub fn trace_overapprox_with(
    spec: &UpdsSpec,
    ca: &ConfigAutomaton,
    abstraction: TraceAbstraction,
) -> TraceAutomaton {
    let mut nfa: Nfa<RuleId> = Nfa::new();
    let owner: Vec<State>;
    match abstraction {
        TraceAbstraction::ControlGraph => {
            nfa.add_states(spec.num_states());
            owner = spec.all_states().collect();
            for p in spec.all_states() {
                if ca.component(p).is_some_and(|c| !c.is_empty()) {
                    nfa.set_initial(p.0);
                }
            }
            for id in spec.rule_ids() {
                let r = spec.rule(id);
                nfa.add_edge(r.from.0, Some(id), r.to.0);
            }
        }
        TraceAbstraction::TopOfStack => {
            // state (p, t) at index p * (|Γ| + 1) + t, t = |Γ| meaning unknown
            let n = spec.num_symbols() + 1;
            let unknown = spec.num_symbols();
            nfa.add_states(spec.num_states() * n);
            owner = (0..spec.num_states() * n).map(|i| State(i / n)).collect();
            for p in spec.all_states() {
                let Some(comp) = ca.component(p) else { continue };
                let low = comp.project_lower();
                let start = low.eps_closure(low.initial().iter().copied());
                for q in &start {
                    for (l, _) in low.out(*q) {
                        if let Some(s) = l {
                            nfa.set_initial(p.0 * n + s.0);
                        }
                    }
                }
            }
            for id in spec.rule_ids() {
                let r = spec.rule(id);
                let top = match r.action {
                    Action::Pop => unknown,
                    Action::Switch(b) | Action::Push(b, _) => b.0,
                };
                for t in [r.read.0, unknown] {
                    nfa.add_edge(r.from.0 * n + t, Some(id), r.to.0 * n + top);
                }
            }
        }
    }
    for q in 0..nfa.num_states() {
        nfa.set_final(q);
    }
    let (nfa, map) = nfa.trim_with_map();
    let mut kept = vec![State(0); nfa.num_states()];
    for (old, new) in map.iter().enumerate() {
        if let Some(n) = new {
            kept[*n] = owner[old];
        }
    }
    TraceAutomaton { nfa, owner: kept }
}

/// The saturated automaton over Γ. Its first states are those of the trace
/// automaton it was built from; the rest spell the initial upper stacks.
#[derive(Debug, Clone)]
pub struct UpperAutomaton {
    nfa: Nfa<Symbol>,
    traces: TraceAutomaton,
    origin: Option<Configuration>,
}

impl UpperAutomaton {
    pub fn nfa(&self) -> &Nfa<Symbol> {
        &self.nfa
    }

    pub fn traces(&self) -> &TraceAutomaton {
        &self.traces
    }

    /// The single origin, when built by [`saturate_upper`].
    pub fn origin(&self) -> Option<&Configuration> {
        self.origin.as_ref()
    }

    pub fn num_states(&self) -> usize {
        self.nfa.num_states()
    }

    /// Whether `w` labels a path from an initial state to `q`.
    pub fn reaches(&self, q: usize, w: &[Symbol]) -> bool {
        self.nfa
            .run(self.nfa.initial().iter().copied(), w)
            .contains(&q)
    }
}

/// Applies the pop, switch and push saturation rules until nothing changes.
pub fn saturate_upper(spec: &UpdsSpec, at: &TraceAutomaton, origin: &Configuration) -> Result<UpperAutomaton> {
    saturate_upper_ordered(spec, at, origin, false)
}

fn saturate_upper_ordered(
    spec: &UpdsSpec,
    at: &TraceAutomaton,
    origin: &Configuration,
    reverse: bool,
) -> Result<UpperAutomaton> {
    if !origin.upper.is_empty() {
        return Err(Error::Precondition("origin must have an empty upper stack".into()));
    }
    let mut seeds = vec![Nfa::new(); spec.num_states()];
    seeds[origin.state.0] = Nfa::epsilon();
    let nfa = saturate(spec, at, &seeds, reverse)?;
    Ok(UpperAutomaton {
        nfa,
        traces: at.clone(),
        origin: Some(origin.clone()),
    })
}

/// Saturation where the empty sequence at a `p`-state writes any word of
/// `seeds[p]`, i.e. starting from configurations whose upper stacks form
/// that language.
pub fn saturate_upper_seeded(spec: &UpdsSpec, at: &TraceAutomaton, seeds: &[Nfa<Symbol>]) -> Result<UpperAutomaton> {
    if seeds.len() != spec.num_states() {
        return Err(Error::Precondition("one seed language per control state expected".into()));
    }
    let nfa = saturate(spec, at, seeds, false)?;
    Ok(UpperAutomaton {
        nfa,
        traces: at.clone(),
        origin: None,
    })
}

/// Same language, with a single initial state that has no incoming edges.
fn fresh_initial(nfa: &Nfa<Symbol>) -> Nfa<Symbol> {
    let nfa = nfa.remove_epsilons();
    let mut out = Nfa::new();
    out.embed(&nfa);
    let i = out.add_state();
    out.set_initial(i);
    for &f in nfa.finals() {
        out.set_final(f);
    }
    for &q in nfa.initial() {
        if nfa.is_final(q) {
            out.set_final(i);
        }
        for (l, t) in nfa.out(q) {
            out.add_edge(i, *l, *t);
        }
    }
    out
}

fn saturate(spec: &UpdsSpec, at: &TraceAutomaton, seeds: &[Nfa<Symbol>], reverse: bool) -> Result<Nfa<Symbol>> {
    TraceAutomaton::new(spec, at.nfa.clone(), at.owner.clone())?;
    let n = at.num_states();
    let mut au: Nfa<Symbol> = Nfa::new();
    au.add_states(n);
    for q in 0..n {
        au.set_final(q);
    }
    // initial states of the seeds never have incoming edges, which the
    // second push case relies on
    for (p, seed) in seeds.iter().enumerate() {
        if seed.is_empty() {
            continue;
        }
        let seed = fresh_initial(seed);
        let off = au.embed(&seed);
        for &i in seed.initial() {
            au.set_initial(i + off);
        }
        for &f in seed.finals() {
            for &i in at.nfa.initial() {
                if at.owner[i] == State(p) {
                    au.add_edge(f + off, None, i);
                }
            }
        }
    }
    let mut pushes: Vec<(usize, usize)> = Vec::new();
    for (q0, l, q1) in at.nfa.edges() {
        let r = spec.rule(l.expect("labelled"));
        match r.action {
            Action::Pop => {
                au.add_edge(q0, Some(r.read), q1);
            }
            Action::Switch(_) => {
                au.add_edge(q0, None, q1);
            }
            Action::Push(..) => pushes.push((q0, q1)),
        }
    }
    if reverse {
        pushes.reverse();
    }
    let total = au.num_states();
    let initial: Vec<usize> = au.initial().iter().copied().collect();
    loop {
        let closures: Vec<BTreeSet<usize>> = (0..total).map(|q| au.eps_closure([q])).collect();
        let mut added = false;
        for &(q0, q1) in &pushes {
            let mut sources: Vec<usize> = Vec::new();
            for q in 0..total {
                let hit = au
                    .out(q)
                    .iter()
                    .any(|(l, t)| l.is_some() && closures[*t].contains(&q0));
                if hit {
                    sources.push(q);
                }
            }
            for &i in &initial {
                if closures[i].contains(&q0) {
                    sources.push(i);
                }
            }
            for q in sources {
                added |= au.add_edge(q, None, q1);
            }
        }
        if !added {
            break;
        }
    }
    Ok(au)
}

/// One automaton per control state: the upper stacks written by the
/// sequences that end in that state.
pub fn upper_config_set(au: &UpperAutomaton, num_states: usize) -> Vec<Nfa<Symbol>> {
    (0..num_states)
        .map(|p| {
            let mut m: Nfa<Symbol> = Nfa::new();
            m.embed(&au.nfa);
            for &i in au.nfa.initial() {
                m.set_initial(i);
            }
            for q in 0..au.traces.num_states() {
                if au.traces.owner(q) == State(p) {
                    m.set_final(q);
                }
            }
            m.remove_epsilons().trim()
        })
        .collect()
}

/// A shortest sequence of the trace automaton that ends in `q` and writes
/// `w` from the origin, searching sequences of length at most `max_len`.
pub fn upsilon_witness(spec: &UpdsSpec, au: &UpperAutomaton, q: usize, w: &[Symbol], max_len: usize) -> Option<Vec<RuleId>> {
    let origin = au.origin.as_ref()?;
    let nfa = au.traces.nfa();
    let mut seen: HashSet<(usize, Vec<Symbol>)> = HashSet::new();
    let mut queue: VecDeque<(usize, Vec<RuleId>)> = VecDeque::new();
    for &i in nfa.initial() {
        queue.push_back((i, Vec::new()));
        seen.insert((i, origin.upper.clone()));
    }
    while let Some((s, t)) = queue.pop_front() {
        let up = upsilon(spec, &t, origin);
        if s == q && up == w {
            return Some(t);
        }
        if t.len() == max_len {
            continue;
        }
        for (l, r) in nfa.out(s) {
            let mut t2 = t.clone();
            t2.push(l.expect("labelled"));
            let up2 = upsilon(spec, &t2, origin);
            // upper words longer than w plus the remaining steps can't shrink back
            if up2.len() > w.len() + (max_len - t2.len()) {
                continue;
            }
            if seen.insert((*r, up2)) {
                queue.push_back((*r, t2));
            }
        }
    }
    None
}

fn strip_foreign(a: &Nfa<Symbol>, n_sym: usize) -> Nfa<Symbol> {
    let mut out: Nfa<Symbol> = Nfa::new();
    out.add_states(a.num_states());
    for (q, l, t) in a.edges() {
        if l.is_some_and(|s| s.0 < n_sym) {
            out.add_edge(q, *l, t);
        }
    }
    for &i in a.initial() {
        out.set_initial(i);
    }
    for &f in a.finals() {
        out.set_final(f);
    }
    out.trim()
}

/// A regular superset of `post*(C)`: per control state, the upper stacks
/// written by over-approximated traces times the exact lower stacks, plus
/// `C` itself.
pub fn overapprox_post(spec: &UpdsSpec, ca: &ConfigAutomaton) -> Result<ConfigAutomaton> {
    overapprox_post_with(spec, ca, TraceAbstraction::ControlGraph)
}

/// Saturation is seeded with the upper-stack slices of `C`.
pub fn overapprox_post_with(
    spec: &UpdsSpec,
    ca: &ConfigAutomaton,
    abstraction: TraceAbstraction,
) -> Result<ConfigAutomaton> {
    if ca.num_states() != spec.num_states() || ca.num_symbols() != spec.num_symbols() {
        return Err(Error::AlphabetMismatch("configuration automaton does not match the system".into()));
    }
    let at = trace_overapprox_with(spec, ca, abstraction);
    let au = saturate_upper_seeded(spec, &at, &ca.project_upper())?;
    Ok(product(spec, ca, &upper_config_set(&au, spec.num_states())))
}

/// The same bound computed through the single-origin system. Regular trace
/// abstractions cannot follow how that system lays out the initial upper
/// stacks, so the upper slices are usually much coarser.
pub fn overapprox_post_single_origin(spec: &UpdsSpec, ca: &ConfigAutomaton) -> Result<ConfigAutomaton> {
    let so = single_origin(spec, ca)?;
    let origin_set = ConfigAutomaton::from_config_set(&so.spec, [&so.origin])?;
    let at = trace_overapprox(&so.spec, &origin_set);
    let au = saturate_upper(&so.spec, &at, &so.origin)?;
    let n_sym = spec.num_symbols();
    let uppers: Vec<Nfa<Symbol>> = upper_config_set(&au, spec.num_states())
        .iter()
        .map(|u| strip_foreign(u, n_sym))
        .collect();
    Ok(product(spec, ca, &uppers))
}

fn product(spec: &UpdsSpec, ca: &ConfigAutomaton, uppers: &[Nfa<Symbol>]) -> ConfigAutomaton {
    let lower = pds_post_star(spec, &LowerAutomaton::from_components(ca.project_lower()));
    let mut out = ConfigAutomaton::empty(spec);
    for p in spec.all_states() {
        let prod = Component::concat(&uppers[p.0], lower.component(p));
        let own = ca.component(p).cloned().unwrap_or_default();
        out.set_component(p, prod.union(&own).normalized());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{c1, e1, e2, c2, E1_C, E1_E, E1_RA, E1_RB, E1_SX};
    use crate::oracle::{oracle_post, replay};

    #[test]
    fn control_graph_abstraction() {
        let spec = e1();
        let ca = c1(&spec);
        let at = trace_overapprox(&spec, &ca);
        assert_eq!(at.num_states(), 2);
        assert_eq!(at.nfa().num_edges(), 6);
        assert!(at.accepts(&[E1_SX, E1_RA]));
        let real = [E1_SX, E1_C, E1_RA, E1_RB, E1_E];
        let start = spec.config("p", &[], &["x", "bot"]).unwrap();
        assert!(replay(&spec, &start, &real).is_some());
        assert!(at.accepts(&real));
        assert!(replay(&spec, &start, &[E1_SX, E1_SX]).is_none());
        assert!(at.accepts(&[E1_SX, E1_SX]));

        let bare = UpdsSpec::new(&["p"], &["a"]).unwrap();
        let c = bare.config("p", &[], &["a"]).unwrap();
        let at = trace_overapprox(&bare, &ConfigAutomaton::from_config_set(&bare, [&c]).unwrap());
        assert!(at.accepts(&[]));
        assert_eq!(at.nfa().num_edges(), 0);
    }

    #[test]
    fn single_pop_edge() {
        let spec = e1();
        let p = spec.state_id("p").unwrap();
        let mut nfa: Nfa<RuleId> = Nfa::new();
        nfa.add_states(2);
        nfa.set_initial(0);
        nfa.add_edge(0, Some(E1_RA), 1);
        let at = TraceAutomaton::new(&spec, nfa, vec![p, p]).unwrap();
        let origin = spec.config("p", &[], &["a"]).unwrap();
        let au = saturate_upper(&spec, &at, &origin).unwrap();
        let a = spec.symbol_id("a").unwrap();
        let l = upper_config_set(&au, spec.num_states());
        assert!(l[p.0].accepts(&[a]));
        assert!(l[p.0].accepts(&[]));
        assert_eq!(l[p.0].words_up_to(3).len(), 2);
    }

    #[test]
    fn not_meaningful_is_rejected() {
        let spec = e1();
        let p = spec.state_id("p").unwrap();
        let mut nfa: Nfa<RuleId> = Nfa::new();
        nfa.add_states(2);
        nfa.set_initial(0);
        nfa.add_edge(0, Some(E1_E), 1);
        assert!(TraceAutomaton::new(&spec, nfa, vec![p, p]).is_err());
    }

    #[test]
    fn push_on_empty_upper_adds_epsilon() {
        let spec = e1();
        let ca = c1(&spec);
        let at = trace_overapprox(&spec, &ca);
        let origin = spec.config("p", &[], &["x", "bot"]).unwrap();
        let au = saturate_upper(&spec, &at, &origin).unwrap();
        let seqs = au.traces().sequences_up_to(4);
        for (t, q) in seqs {
            let w = upsilon(&spec, &t, &origin);
            assert!(au.reaches(q, &w));
        }
    }

    #[test]
    fn order_does_not_matter() {
        let spec = e1();
        let at = trace_overapprox(&spec, &c1(&spec));
        let origin = spec.config("p", &[], &["x", "bot"]).unwrap();
        let a = saturate_upper_ordered(&spec, &at, &origin, false).unwrap();
        let b = saturate_upper_ordered(&spec, &at, &origin, true).unwrap();
        let ea: BTreeSet<_> = a.nfa().edges().map(|(q, l, t)| (q, *l, t)).collect();
        let eb: BTreeSet<_> = b.nfa().edges().map(|(q, l, t)| (q, *l, t)).collect();
        assert_eq!(ea, eb);
    }

    #[test]
    fn overapprox_contains_reachable() {
        let spec = e1();
        let ca = c1(&spec);
        let o = overapprox_post(&spec, &ca).unwrap();
        assert!(o.accepts(&spec.config("p'", &["a"], &["bot"]).unwrap()));
        let init: Vec<_> = ca.configs_up_to(6).into_iter().collect();
        for c in oracle_post(&spec, &init, 8, 8).unwrap() {
            assert!(o.accepts(&c), "{c}");
        }

        let spec = e2();
        let ca = c2(&spec);
        let variants = [
            overapprox_post(&spec, &ca).unwrap(),
            overapprox_post_with(&spec, &ca, TraceAbstraction::TopOfStack).unwrap(),
            overapprox_post_single_origin(&spec, &ca).unwrap(),
        ];
        let init: Vec<_> = ca.configs_up_to(6).into_iter().collect();
        for c in oracle_post(&spec, &init, 6, 8).unwrap() {
            for o in &variants {
                assert!(o.accepts(&c), "{c}");
            }
        }
    }

    #[test]
    fn single_origin_route_is_sound_on_e1() {
        let spec = e1();
        let ca = c1(&spec);
        let o = overapprox_post_single_origin(&spec, &ca).unwrap();
        let init: Vec<_> = ca.configs_up_to(6).into_iter().collect();
        for c in oracle_post(&spec, &init, 6, 8).unwrap() {
            assert!(o.accepts(&c), "{c}");
        }
    }

    #[test]
    fn no_rules_keeps_initial_set() {
        let spec = UpdsSpec::new(&["p", "q"], &["a", "b"]).unwrap();
        let ca = ConfigAutomaton::from_config_set(
            &spec,
            &[
                spec.config("p", &["a"], &["b"]).unwrap(),
                spec.config("q", &["b"], &[]).unwrap(),
            ],
        )
        .unwrap();
        let o = overapprox_post(&spec, &ca).unwrap();
        for c in ca.configs_up_to(4) {
            assert!(o.accepts(&c));
        }
        assert!(!o.accepts(&spec.config("p", &["b", "a"], &["b"]).unwrap()));
        assert!(!o.accepts(&spec.config("q", &["b"], &["a"]).unwrap()));
    }
}
