//! Bounded-phase backward reachability.
//!
//! A phase uses either only push and switch rules or only pop and switch
//! rules. `phase_pre` computes the exact predecessors of a regular set under
//! one phase; iterating it `k` times gives `pre*` restricted to traces of at
//! most `k` phases.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::fsa::{Component, ConfigAutomaton, Letter, Nfa, Zone};
use crate::system::{Action, Configuration, RuleId, RuleKind, State, Symbol, UpdsSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    PushPhase,
    PopPhase,
}

impl PhaseKind {
    pub fn allows(self, kind: RuleKind) -> bool {
        match self {
            PhaseKind::PushPhase => kind != RuleKind::Pop,
            PhaseKind::PopPhase => kind != RuleKind::Push,
        }
    }
}

/// Control states of the two-stack system: the original ones plus one
/// intermediate state per pop or push rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MState {
    Orig(State),
    Tag(RuleId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MSym {
    Sym(Symbol),
    Bottom,
}

/// `(from, read, stack) -> (to, write)`; stack 1 holds the upper stack
/// (rightmost upper symbol on top, `⊥` at the bottom), stack 2 the lower.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MpdsRule {
    pub from: MState,
    pub read: MSym,
    pub stack: usize,
    pub to: MState,
    pub write: Vec<MSym>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mpds {
    pub num_symbols: usize,
    pub rules: Vec<MpdsRule>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MpdsConfig {
    pub state: MState,
    pub stacks: [Vec<MSym>; 2],
}

impl MpdsConfig {
    pub fn from_config(c: &Configuration) -> Self {
        let mut upper: Vec<MSym> = c.upper.iter().rev().map(|&s| MSym::Sym(s)).collect();
        upper.push(MSym::Bottom);
        MpdsConfig {
            state: MState::Orig(c.state),
            stacks: [upper, c.lower.iter().map(|&s| MSym::Sym(s)).collect()],
        }
    }

    /// Back to an upper-stack configuration, if in an original state.
    pub fn to_config(&self) -> Option<Configuration> {
        let MState::Orig(p) = self.state else {
            return None;
        };
        let (last, rest) = self.stacks[0].split_last()?;
        if *last != MSym::Bottom {
            return None;
        }
        let plain = |w: &[MSym]| -> Option<Vec<Symbol>> {
            w.iter()
                .map(|s| match s {
                    MSym::Sym(x) => Some(*x),
                    MSym::Bottom => None,
                })
                .collect()
        };
        let mut upper = plain(rest)?;
        upper.reverse();
        Some(Configuration::new(p, upper, plain(&self.stacks[1])?))
    }
}

/// The two-stack system simulating `spec`: pops move the popped symbol to
/// stack 1, pushes erase the top of stack 1 unless it is `⊥`.
pub fn upds_to_mpds(spec: &UpdsSpec) -> Result<Mpds> {
    if spec.symbols().iter().any(|s| s == "⊥") {
        return Err(Error::Precondition("alphabet already contains ⊥".into()));
    }
    let mut rules = Vec::new();
    for id in spec.rule_ids() {
        let r = spec.rule(id);
        let (from, to, read) = (MState::Orig(r.from), MState::Orig(r.to), MSym::Sym(r.read));
        match r.action {
            Action::Switch(b) => rules.push(MpdsRule {
                from,
                read,
                stack: 2,
                to,
                write: vec![MSym::Sym(b)],
            }),
            Action::Pop => {
                rules.push(MpdsRule {
                    from,
                    read,
                    stack: 2,
                    to: MState::Tag(id),
                    write: vec![],
                });
                for x in spec.all_symbols().map(MSym::Sym).chain([MSym::Bottom]) {
                    rules.push(MpdsRule {
                        from: MState::Tag(id),
                        read: x,
                        stack: 1,
                        to,
                        write: vec![read, x],
                    });
                }
            }
            Action::Push(b, c) => {
                rules.push(MpdsRule {
                    from,
                    read,
                    stack: 2,
                    to: MState::Tag(id),
                    write: vec![MSym::Sym(b), MSym::Sym(c)],
                });
                for x in spec.all_symbols() {
                    rules.push(MpdsRule {
                        from: MState::Tag(id),
                        read: MSym::Sym(x),
                        stack: 1,
                        to,
                        write: vec![],
                    });
                }
                rules.push(MpdsRule {
                    from: MState::Tag(id),
                    read: MSym::Bottom,
                    stack: 1,
                    to,
                    write: vec![MSym::Bottom],
                });
            }
        }
    }
    Ok(Mpds {
        num_symbols: spec.num_symbols(),
        rules,
    })
}

impl Mpds {
    pub fn step(&self, c: &MpdsConfig) -> Vec<MpdsConfig> {
        let mut out = Vec::new();
        for r in &self.rules {
            let stack = &c.stacks[r.stack - 1];
            if r.from != c.state || stack.first() != Some(&r.read) {
                continue;
            }
            let mut next = c.clone();
            let mut s = r.write.clone();
            s.extend_from_slice(&stack[1..]);
            next.stacks[r.stack - 1] = s;
            next.state = r.to;
            out.push(next);
        }
        out
    }
}

/// `(r, γ) ↦` every `(r', γ')` reachable by switch rules, itself included.
fn switch_closure(spec: &UpdsSpec) -> HashMap<(State, Symbol), BTreeSet<(State, Symbol)>> {
    let mut out = HashMap::new();
    for p in spec.all_states() {
        for g in spec.all_symbols() {
            let mut seen = BTreeSet::from([(p, g)]);
            let mut queue = VecDeque::from([(p, g)]);
            while let Some((r, h)) = queue.pop_front() {
                for id in spec.rules_from(r, h) {
                    let rule = spec.rule(id);
                    if let Action::Switch(b) = rule.action {
                        if seen.insert((rule.to, b)) {
                            queue.push_back((rule.to, b));
                        }
                    }
                }
            }
            out.insert((p, g), seen);
        }
    }
    out
}

/// Builds a component by exploring keys from `inits`.
fn explore<K: Clone + Eq + Hash>(
    inits: Vec<K>,
    zone: impl Fn(&K) -> Zone,
    is_final: impl Fn(&K) -> bool,
    succ: impl Fn(&K, &mut Vec<(Option<Letter>, K)>),
) -> Component {
    let mut nfa: Nfa<Letter> = Nfa::new();
    let mut zones = Vec::new();
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut queue: VecDeque<(K, usize)> = VecDeque::new();
    let mut intern = |k: K, nfa: &mut Nfa<Letter>, queue: &mut VecDeque<(K, usize)>| -> usize {
        if let Some(&q) = index.get(&k) {
            return q;
        }
        let q = nfa.add_state();
        if is_final(&k) {
            nfa.set_final(q);
        }
        zones.push(zone(&k));
        index.insert(k.clone(), q);
        queue.push_back((k, q));
        q
    };
    for k in inits {
        let q = intern(k, &mut nfa, &mut queue);
        nfa.set_initial(q);
    }
    let mut buf = Vec::new();
    while let Some((k, q)) = queue.pop_front() {
        succ(&k, &mut buf);
        for (l, t) in buf.drain(..) {
            let r = intern(t, &mut nfa, &mut queue);
            nfa.add_edge(q, l, r);
        }
    }
    Component::new(nfa, zones)
        .expect("phase construction respects zones")
        .normalized()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PopKey {
    A(State, usize),
    B(State, State, usize),
    D(State, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum PushKey {
    Init,
    A(State, usize),
    /// `(p', r, g, x, absorbing)`
    S(State, State, Symbol, usize, bool),
    D(State, usize),
}

fn x_nfa(x: &ConfigAutomaton, p: State) -> &Nfa<Letter> {
    x.component(p).expect("state in range").nfa()
}

fn pop_phase_component(
    spec: &UpdsSpec,
    x: &ConfigAutomaton,
    p: State,
    sw: &HashMap<(State, Symbol), BTreeSet<(State, Symbol)>>,
) -> Component {
    // (r, γ) ↦ (r', σ): switches, then a pop reading σ
    let mut popchain: HashMap<(State, Symbol), Vec<(State, Symbol)>> = HashMap::new();
    for (&key, set) in sw {
        let mut v = Vec::new();
        for &(r, s) in set {
            for id in spec.rules_from(r, s) {
                let rule = spec.rule(id);
                if rule.action == Action::Pop {
                    v.push((rule.to, s));
                }
            }
        }
        v.sort();
        v.dedup();
        popchain.insert(key, v);
    }
    let inits: Vec<PopKey> = spec
        .all_states()
        .flat_map(|p2| x_nfa(x, p2).initial().iter().map(move |&q| PopKey::A(p2, q)))
        .collect();
    explore(
        inits,
        |k| match k {
            PopKey::A(..) => Zone::Upper,
            _ => Zone::Lower,
        },
        |k| match *k {
            PopKey::B(r, p2, q) => r == p2 && x_nfa(x, p2).is_final(q),
            PopKey::D(p2, q) => x_nfa(x, p2).is_final(q),
            PopKey::A(..) => false,
        },
        |k, out| match *k {
            PopKey::A(p2, q) => {
                for (l, t) in x_nfa(x, p2).out(q) {
                    if matches!(l, None | Some(Letter::Upper(_))) {
                        out.push((*l, PopKey::A(p2, *t)));
                    }
                }
                out.push((None, PopKey::B(p, p2, q)));
            }
            PopKey::B(r, p2, q) => {
                let xa = x_nfa(x, p2);
                for (l, t) in xa.out(q) {
                    if l.is_none() {
                        out.push((None, PopKey::B(r, p2, *t)));
                    }
                }
                for g in spec.all_symbols() {
                    for &(r3, s) in &popchain[&(r, g)] {
                        for (l, t) in xa.out(q) {
                            if *l == Some(Letter::Upper(s)) {
                                out.push((Some(Letter::Lower(g)), PopKey::B(r3, p2, *t)));
                            }
                        }
                    }
                    for &(r2, g2) in &sw[&(r, g)] {
                        if r2 != p2 {
                            continue;
                        }
                        for (l, t) in xa.out(q) {
                            if *l == Some(Letter::Lower(g2)) {
                                out.push((Some(Letter::Lower(g)), PopKey::D(p2, *t)));
                            }
                        }
                    }
                }
            }
            PopKey::D(p2, q) => {
                for (l, t) in x_nfa(x, p2).out(q) {
                    if !matches!(l, Some(Letter::Upper(_))) {
                        out.push((*l, PopKey::D(p2, *t)));
                    }
                }
            }
        },
    )
}

fn push_phase_component(
    spec: &UpdsSpec,
    x: &ConfigAutomaton,
    p: State,
    rev_switch: &HashMap<(State, Symbol), Vec<(State, Symbol)>>,
    rev_push: &HashMap<(State, Symbol), Vec<(State, Symbol, Symbol)>>,
) -> Component {
    let mut inits = vec![PushKey::Init];
    for p2 in spec.all_states() {
        for &q in x_nfa(x, p2).initial() {
            inits.push(PushKey::A(p2, q));
        }
    }
    let empty_rs: Vec<(State, Symbol)> = Vec::new();
    let empty_rp: Vec<(State, Symbol, Symbol)> = Vec::new();
    explore(
        inits,
        |k| match k {
            PushKey::D(..) => Zone::Lower,
            _ => Zone::Upper,
        },
        |k| match *k {
            PushKey::A(p2, q) => p2 == p && x_nfa(x, p2).is_final(q),
            PushKey::D(p2, q) => x_nfa(x, p2).is_final(q),
            _ => false,
        },
        |k, out| match *k {
            PushKey::Init => {
                for p2 in spec.all_states() {
                    let xa = x_nfa(x, p2);
                    for y in xa.eps_closure(xa.initial().iter().copied()) {
                        for (l, t) in xa.out(y) {
                            if let Some(Letter::Lower(g)) = l {
                                out.push((None, PushKey::S(p2, p2, *g, *t, true)));
                            }
                        }
                    }
                }
            }
            PushKey::A(p2, q) => {
                for (l, t) in x_nfa(x, p2).out(q) {
                    match l {
                        None | Some(Letter::Upper(_)) => out.push((*l, PushKey::A(p2, *t))),
                        Some(Letter::Lower(g)) => {
                            out.push((None, PushKey::S(p2, p2, *g, *t, false)))
                        }
                    }
                }
            }
            PushKey::S(p2, r, g, q, absorbing) => {
                let xa = x_nfa(x, p2);
                for (l, t) in xa.out(q) {
                    if l.is_none() {
                        out.push((None, PushKey::S(p2, r, g, *t, absorbing)));
                    }
                }
                for &(r0, g0) in rev_switch.get(&(r, g)).unwrap_or(&empty_rs) {
                    out.push((None, PushKey::S(p2, r0, g0, q, absorbing)));
                }
                for &(r0, g0, c) in rev_push.get(&(r, g)).unwrap_or(&empty_rp) {
                    for (l, t) in xa.out(q) {
                        if *l != Some(Letter::Lower(c)) {
                            continue;
                        }
                        if absorbing {
                            out.push((None, PushKey::S(p2, r0, g0, *t, true)));
                        }
                        for s in spec.all_symbols() {
                            out.push((Some(Letter::Upper(s)), PushKey::S(p2, r0, g0, *t, false)));
                        }
                    }
                }
                if absorbing {
                    out.push((None, PushKey::S(p2, r, g, q, false)));
                } else if r == p {
                    out.push((Some(Letter::Lower(g)), PushKey::D(p2, q)));
                }
            }
            PushKey::D(p2, q) => {
                for (l, t) in x_nfa(x, p2).out(q) {
                    if !matches!(l, Some(Letter::Upper(_))) {
                        out.push((*l, PushKey::D(p2, *t)));
                    }
                }
            }
        },
    )
}

/// Predecessors of `targets` under one phase of the given kind, the empty
/// trace included.
pub fn phase_pre(spec: &UpdsSpec, targets: &ConfigAutomaton, kind: PhaseKind) -> Result<ConfigAutomaton> {
    if targets.num_states() != spec.num_states() || targets.num_symbols() != spec.num_symbols() {
        return Err(Error::AlphabetMismatch(
            "target automaton does not match the system".into(),
        ));
    }
    let x = targets.normalized();
    let mut out = ConfigAutomaton::empty(spec);
    match kind {
        PhaseKind::PopPhase => {
            let sw = switch_closure(spec);
            for p in spec.all_states() {
                out.set_component(p, pop_phase_component(spec, &x, p, &sw));
            }
        }
        PhaseKind::PushPhase => {
            let mut rev_switch: HashMap<(State, Symbol), Vec<(State, Symbol)>> = HashMap::new();
            let mut rev_push: HashMap<(State, Symbol), Vec<(State, Symbol, Symbol)>> = HashMap::new();
            for r in spec.rules() {
                match r.action {
                    Action::Switch(b) => rev_switch.entry((r.to, b)).or_default().push((r.from, r.read)),
                    Action::Push(b, c) => rev_push
                        .entry((r.to, b))
                        .or_default()
                        .push((r.from, r.read, c)),
                    Action::Pop => {}
                }
            }
            for p in spec.all_states() {
                out.set_component(p, push_phase_component(spec, &x, p, &rev_switch, &rev_push));
            }
        }
    }
    Ok(out)
}

/// `pre*` restricted to traces of at most `k` phases.
pub fn bounded_phase_pre_star(spec: &UpdsSpec, targets: &ConfigAutomaton, k: usize) -> Result<ConfigAutomaton> {
    let mut cur = targets.normalized();
    for _ in 0..k {
        let pop = phase_pre(spec, &cur, PhaseKind::PopPhase)?;
        let push = phase_pre(spec, &cur, PhaseKind::PushPhase)?;
        cur = pop.union(&push)?.normalized();
    }
    Ok(cur)
}
