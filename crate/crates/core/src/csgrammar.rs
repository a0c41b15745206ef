//! Forward reachability of single configurations.
//!
//! A regular initial set is first collapsed to the single configuration
//! `⟨p$, ε, $⟩` of an extended system that builds every initial
//! configuration on its own. Reachability from that origin is then the
//! language of a noncontracting grammar whose words are `⊤ u p l ⊥`, decided
//! by exhaustive search over bounded-length sentential forms.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::fsa::{ConfigAutomaton, Letter, Nfa};
use crate::system::{Action, Configuration, Rule, RuleId, State, Symbol, UpdsSpec};

pub const DEFAULT_FORM_BUDGET: usize = 10_000_000;

/// The extended system and its origin. Original states and symbols keep
/// their ids.
#[derive(Debug, Clone)]
pub struct SingleOriginUpds {
    pub spec: UpdsSpec,
    pub origin: Configuration,
    pub num_original_states: usize,
    pub num_original_symbols: usize,
    bars: Vec<Symbol>,
}

impl SingleOriginUpds {
    /// The auxiliary copy of an original symbol used while building the
    /// upper stack.
    pub fn bar(&self, s: Symbol) -> Symbol {
        self.bars[s.0]
    }

    pub fn is_original_state(&self, p: State) -> bool {
        p.0 < self.num_original_states
    }

    pub fn is_original_config(&self, c: &Configuration) -> bool {
        self.is_original_state(c.state)
            && c.upper
                .iter()
                .chain(&c.lower)
                .all(|s| s.0 < self.num_original_symbols)
    }
}

fn fresh_state(spec: &mut UpdsSpec, base: &str) -> State {
    let mut name = base.to_string();
    while spec.has_state(&name) {
        name.push('\'');
    }
    spec.add_state(&name).expect("fresh name")
}

fn fresh_symbol(spec: &mut UpdsSpec, base: &str) -> Symbol {
    let mut name = base.to_string();
    while spec.has_symbol(&name) {
        name.push('\'');
    }
    spec.add_symbol(&name).expect("fresh name")
}

/// Mirror image of `{bar(u)·l | ⟨p, u, l⟩ ∈ C, l ≠ ε}` over the extended
/// alphabet, with a single initial state without incoming edges and a single
/// final state without outgoing edges. Returns `(nfa, initial, final)`.
fn origin_automaton(
    ca: &ConfigAutomaton,
    p: State,
    bars: &[Symbol],
) -> Option<(Nfa<Symbol>, usize, usize)> {
    let comp = ca.component(p)?;
    let mut flag: Nfa<Letter> = Nfa::new();
    flag.add_states(2);
    flag.set_initial(0);
    flag.set_final(1);
    for s in 0..ca.num_symbols() {
        flag.add_edge(0, Some(Letter::Upper(Symbol(s))), 0);
        flag.add_edge(0, Some(Letter::Lower(Symbol(s))), 1);
        flag.add_edge(1, Some(Letter::Lower(Symbol(s))), 1);
    }
    let nonempty = comp.nfa().intersect(&flag);
    let mirrored = nonempty
        .map_labels(|l| {
            Some(match *l {
                Letter::Upper(s) => bars[s.0],
                Letter::Lower(s) => s,
            })
        })
        .reverse()
        .remove_epsilons()
        .trim();
    if mirrored.is_empty() {
        return None;
    }
    let mut out: Nfa<Symbol> = Nfa::new();
    let off = out.embed(&mirrored);
    let i = out.add_state();
    let f = out.add_state();
    out.set_initial(i);
    out.set_final(f);
    for (q, l, t) in mirrored.edges() {
        let l = *l;
        let from_init = mirrored.initial().contains(&q);
        let to_final = mirrored.is_final(t);
        if from_init {
            out.add_edge(i, l, t + off);
        }
        if to_final {
            out.add_edge(q + off, l, f);
        }
        if from_init && to_final {
            out.add_edge(i, l, f);
        }
    }
    let (out, map) = out.trim_with_map();
    Some((out, map[i]?, map[f]?))
}

/// Builds the extended system of which every configuration of `C` with a
/// nonempty lower stack is a successor of `⟨p$, ε, $⟩`.
pub fn single_origin(spec: &UpdsSpec, ca: &ConfigAutomaton) -> Result<SingleOriginUpds> {
    if ca.num_states() != spec.num_states() || ca.num_symbols() != spec.num_symbols() {
        return Err(Error::AlphabetMismatch(
            "configuration automaton does not match the system".into(),
        ));
    }
    let mut ext = spec.clone();
    let n_sym = spec.num_symbols();
    let bars: Vec<Symbol> = spec
        .all_symbols()
        .map(|s| {
            let name = format!("{}~", spec.symbol_name(s));
            fresh_symbol(&mut ext, &name)
        })
        .collect();
    let dollar = fresh_symbol(&mut ext, "$");
    let origin_state = fresh_state(&mut ext, "p$");
    let building: Vec<Symbol> = (0..n_sym).map(Symbol).chain(bars.iter().copied()).collect();

    for p in spec.all_states() {
        let Some((nfa, init, fin)) = origin_automaton(ca, p, &bars) else {
            continue;
        };
        let pname = spec.state_name(p).to_string();
        let base = ext.num_states();
        let ids: Vec<State> = (0..nfa.num_states())
            .map(|q| {
                let name = if q == fin {
                    format!("{pname}.f")
                } else {
                    format!("{pname}.q{q}")
                };
                fresh_state(&mut ext, &name)
            })
            .collect();
        debug_assert!(ids.iter().all(|s| s.0 >= base));
        let tau = fresh_state(&mut ext, &format!("{pname}.t"));
        for (q, l, t) in nfa.edges() {
            let x = l.expect("ε-free");
            if q == init {
                ext.add_rule(Rule {
                    from: origin_state,
                    read: dollar,
                    to: ids[t],
                    action: Action::Switch(x),
                })?;
            } else {
                for &y in &building {
                    ext.add_rule(Rule {
                        from: ids[q],
                        read: y,
                        to: ids[t],
                        action: Action::Push(x, y),
                    })?;
                }
            }
        }
        let f = ids[fin];
        for x in spec.all_symbols() {
            ext.add_rule(Rule {
                from: f,
                read: bars[x.0],
                to: tau,
                action: Action::Switch(x),
            })?;
            ext.add_rule(Rule {
                from: tau,
                read: x,
                to: f,
                action: Action::Pop,
            })?;
        }
        for x in spec.all_symbols() {
            ext.add_rule(Rule {
                from: f,
                read: x,
                to: p,
                action: Action::Switch(x),
            })?;
        }
    }

    Ok(SingleOriginUpds {
        spec: ext,
        origin: Configuration::new(origin_state, Vec::new(), vec![dollar]),
        num_original_states: spec.num_states(),
        num_original_symbols: n_sym,
        bars,
    })
}

/// Grammar symbols. `Top`, `Bottom`, `State` and `Sym` are terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GSym {
    Start,
    Top,
    Bottom,
    State(State),
    Sym(Symbol),
    BarState(State),
    BarSym(Symbol),
    /// Working symbol of a switch or pop rule.
    Rule(RuleId),
    Push0(RuleId),
    Push1(RuleId),
}

impl GSym {
    pub fn is_terminal(self) -> bool {
        matches!(self, GSym::Top | GSym::Bottom | GSym::State(_) | GSym::Sym(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Production {
    pub lhs: Vec<GSym>,
    pub rhs: Vec<GSym>,
}

impl Production {
    fn new(lhs: Vec<GSym>, rhs: Vec<GSym>) -> Self {
        Production { lhs, rhs }
    }

    pub fn is_noncontracting(&self) -> bool {
        self.lhs.len() <= self.rhs.len()
    }
}

/// A noncontracting grammar for `post*` of a single-origin system.
#[derive(Debug, Clone)]
pub struct CsGrammar {
    spec: UpdsSpec,
    productions: Vec<Production>,
    index: HashMap<(GSym, Option<GSym>), Vec<usize>>,
}

impl CsGrammar {
    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// The system whose reachability the grammar describes.
    pub fn spec(&self) -> &UpdsSpec {
        &self.spec
    }

    pub fn is_noncontracting(&self) -> bool {
        self.productions.iter().all(Production::is_noncontracting)
    }

    /// `⊤ u p l ⊥`.
    pub fn encode(&self, c: &Configuration) -> Vec<GSym> {
        encode_config(c)
    }

    /// Inverse of [`CsGrammar::encode`] on well-shaped terminal words.
    pub fn decode(&self, w: &[GSym]) -> Option<Configuration> {
        let (GSym::Top, rest) = w.split_first()? else {
            return None;
        };
        let (GSym::Bottom, body) = rest.split_last()? else {
            return None;
        };
        let pos = body.iter().position(|s| matches!(s, GSym::State(_)))?;
        let GSym::State(p) = body[pos] else {
            return None;
        };
        let syms = |part: &[GSym]| -> Option<Vec<Symbol>> {
            part.iter()
                .map(|s| match s {
                    GSym::Sym(x) => Some(*x),
                    _ => None,
                })
                .collect()
        };
        Some(Configuration::new(p, syms(&body[..pos])?, syms(&body[pos + 1..])?))
    }

    pub fn sym_name(&self, s: GSym) -> String {
        match s {
            GSym::Start => "S".into(),
            GSym::Top => "⊤".into(),
            GSym::Bottom => "⊥".into(),
            GSym::State(p) => self.spec.state_name(p).into(),
            GSym::Sym(x) => self.spec.symbol_name(x).into(),
            GSym::BarState(p) => format!("[{}]", self.spec.state_name(p)),
            GSym::BarSym(x) => format!("[{}]", self.spec.symbol_name(x)),
            GSym::Rule(r) => format!("d{}", r.0),
            GSym::Push0(r) => format!("d{}.0", r.0),
            GSym::Push1(r) => format!("d{}.1", r.0),
        }
    }

    pub fn form_display(&self, form: &[GSym]) -> String {
        form.iter()
            .map(|&s| self.sym_name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn is_declared_terminal(&self, s: GSym) -> bool {
        match s {
            GSym::Top | GSym::Bottom => true,
            GSym::State(p) => p.0 < self.spec.num_states(),
            GSym::Sym(x) => x.0 < self.spec.num_symbols(),
            _ => false,
        }
    }

    /// Every one-step rewrite of `form`.
    fn rewrites(&self, form: &[GSym], mut emit: impl FnMut(Vec<GSym>)) {
        for i in 0..form.len() {
            let keys = [(form[i], form.get(i + 1).copied()), (form[i], None)];
            for key in keys {
                let Some(list) = self.index.get(&key) else {
                    continue;
                };
                for &pi in list {
                    let prod = &self.productions[pi];
                    if form[i..].starts_with(&prod.lhs) {
                        let mut next = Vec::with_capacity(form.len() + prod.rhs.len() - prod.lhs.len());
                        next.extend_from_slice(&form[..i]);
                        next.extend_from_slice(&prod.rhs);
                        next.extend_from_slice(&form[i + prod.lhs.len()..]);
                        emit(next);
                    }
                }
            }
        }
    }
}

pub fn encode_config(c: &Configuration) -> Vec<GSym> {
    let mut w = vec![GSym::Top];
    w.extend(c.upper.iter().map(|&s| GSym::Sym(s)));
    w.push(GSym::State(c.state));
    w.extend(c.lower.iter().map(|&s| GSym::Sym(s)));
    w.push(GSym::Bottom);
    w
}

/// The grammar whose terminal words encode `post*` of the origin.
pub fn build_post_grammar(so: &SingleOriginUpds) -> CsGrammar {
    use GSym::*;
    let spec = &so.spec;
    let mut prods: Vec<Production> = Vec::new();
    let origin_top = so.origin.lower[0];
    prods.push(Production::new(
        vec![Start],
        vec![Top, BarState(so.origin.state), BarSym(origin_top), Bottom],
    ));
    for id in spec.rule_ids() {
        let crate::system::Rule {
            from: p,
            read: a,
            to: p2,
            action,
        } = *spec.rule(id);
        let (bp, ba, bp2) = (BarState(p), BarSym(a), BarState(p2));
        match action {
            Action::Switch(b) => {
                let bb = BarSym(b);
                prods.push(Production::new(vec![bp, ba], vec![Rule(id), ba]));
                prods.push(Production::new(vec![Rule(id), ba], vec![Rule(id), bb]));
                prods.push(Production::new(vec![Rule(id), bb], vec![bp2, bb]));
            }
            Action::Pop => {
                prods.push(Production::new(vec![bp, ba], vec![bp, Rule(id)]));
                prods.push(Production::new(vec![bp, Rule(id)], vec![ba, Rule(id)]));
                prods.push(Production::new(vec![ba, Rule(id)], vec![ba, bp2]));
            }
            Action::Push(b, c) => {
                let (d0, d1) = (Push0(id), Push1(id));
                let (bb, bc) = (BarSym(b), BarSym(c));
                prods.push(Production::new(vec![bp, ba], vec![d0, ba]));
                for x in spec.all_symbols() {
                    prods.push(Production::new(vec![BarSym(x), d0], vec![d1, d0]));
                }
                prods.push(Production::new(vec![Top, d0], vec![Top, d1, d0]));
                prods.push(Production::new(vec![d1, d0, ba], vec![d1, d0, bc]));
                prods.push(Production::new(vec![d1, d0, bc], vec![d1, bb, bc]));
                prods.push(Production::new(vec![d1, bb, bc], vec![bp2, bb, bc]));
            }
        }
    }
    for p in spec.all_states() {
        prods.push(Production::new(vec![BarState(p)], vec![State(p)]));
    }
    let terminals: Vec<GSym> = spec
        .all_symbols()
        .map(Sym)
        .chain(spec.all_states().map(State))
        .collect();
    for x in spec.all_symbols() {
        for &y in &terminals {
            prods.push(Production::new(vec![BarSym(x), y], vec![Sym(x), y]));
            prods.push(Production::new(vec![y, BarSym(x)], vec![y, Sym(x)]));
        }
    }

    let mut seen = HashSet::new();
    prods.retain(|p| seen.insert(p.clone()));
    let mut index: HashMap<(GSym, Option<GSym>), Vec<usize>> = HashMap::new();
    for (i, p) in prods.iter().enumerate() {
        let key = (p.lhs[0], p.lhs.get(1).copied());
        index.entry(key).or_default().push(i);
    }
    CsGrammar {
        spec: spec.clone(),
        productions: prods,
        index,
    }
}

/// Search statistics of one membership query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MembershipStats {
    pub explored: usize,
    /// Forms where a push working symbol lost its expected neighbour.
    pub context_violations: usize,
}

/// Whether every push working symbol sits in one of the contexts its
/// productions create: `δ₀` after `δ₁`, `⊤` or a barred symbol, and `δ₁`
/// before `δ₀` or a barred symbol.
pub fn push_context_ok(form: &[GSym]) -> bool {
    form.iter().enumerate().all(|(i, s)| match s {
        GSym::Push0(r) => {
            i > 0
                && matches!(form[i - 1], GSym::Top | GSym::BarSym(_))
                || (i > 0 && form[i - 1] == GSym::Push1(*r))
        }
        GSym::Push1(r) => matches!(
            form.get(i + 1),
            Some(GSym::BarSym(_))
        ) || form.get(i + 1) == Some(&GSym::Push0(*r)),
        _ => true,
    })
}

/// Whether `S` derives `w`.
pub fn grammar_membership(g: &CsGrammar, w: &[GSym]) -> Result<bool> {
    grammar_membership_stats(g, w, DEFAULT_FORM_BUDGET).map(|(b, _)| b)
}

/// Breadth-first search over sentential forms no longer than `w`.
///
/// Terminal symbols are never rewritten, and once a state terminal appears
/// only the length-preserving finishing productions apply. Forms holding a
/// state terminal are therefore kept only if they have the length of `w`
/// and agree with it up to bars.
pub fn grammar_membership_stats(
    g: &CsGrammar,
    w: &[GSym],
    budget: usize,
) -> Result<(bool, MembershipStats)> {
    let mut stats = MembershipStats::default();
    if !w.iter().all(|&s| g.is_declared_terminal(s)) {
        return Ok((false, stats));
    }
    let compatible = |form: &[GSym]| -> bool {
        if !form.iter().any(|s| matches!(s, GSym::State(_))) {
            return true;
        }
        form.len() == w.len()
            && form.iter().zip(w).all(|(f, t)| match (*f, *t) {
                (a, b) if a == b => true,
                (GSym::BarSym(x), GSym::Sym(y)) => x == y,
                (GSym::BarState(x), GSym::State(y)) => x == y,
                _ => false,
            })
    };
    let start = vec![GSym::Start];
    let mut seen: HashSet<Vec<GSym>> = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(form) = queue.pop_front() {
        stats.explored += 1;
        if form == w {
            return Ok((true, stats));
        }
        if !push_context_ok(&form) {
            stats.context_violations += 1;
        }
        let mut fresh = Vec::new();
        g.rewrites(&form, |next| {
            if next.len() <= w.len() && compatible(&next) {
                fresh.push(next);
            }
        });
        for next in fresh {
            if !seen.contains(&next) {
                if seen.len() >= budget {
                    return Err(Error::ResourceLimit {
                        explored: seen.len(),
                        budget,
                    });
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok((false, stats))
}

/// Every terminal word of length at most `max_len` derivable in `g`.
pub fn derivable_words(g: &CsGrammar, max_len: usize, budget: usize) -> Result<Vec<Vec<GSym>>> {
    let start = vec![GSym::Start];
    let mut seen: HashSet<Vec<GSym>> = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(form) = queue.pop_front() {
        if form.iter().all(|s| s.is_terminal()) {
            out.push(form.clone());
        }
        let mut fresh = Vec::new();
        g.rewrites(&form, |next| {
            if next.len() <= max_len {
                fresh.push(next);
            }
        });
        for next in fresh {
            if seen.insert(next.clone()) {
                if seen.len() > budget {
                    return Err(Error::ResourceLimit {
                        explored: seen.len(),
                        budget,
                    });
                }
                queue.push_back(next);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Whether `c` is reachable from some configuration of `C`.
pub fn is_reachable(spec: &UpdsSpec, ca: &ConfigAutomaton, c: &Configuration) -> Result<bool> {
    is_reachable_budget(spec, ca, c, DEFAULT_FORM_BUDGET)
}

pub fn is_reachable_budget(
    spec: &UpdsSpec,
    ca: &ConfigAutomaton,
    c: &Configuration,
    budget: usize,
) -> Result<bool> {
    spec.check_config(c)?;
    // members of C with an empty lower stack have no successors and are not
    // rebuilt from the origin
    if ca.accepts(c) {
        return Ok(true);
    }
    let so = single_origin(spec, ca)?;
    let g = build_post_grammar(&so);
    grammar_membership_stats(&g, &encode_config(c), budget).map(|(b, _)| b)
}

impl fmt::Display for CsGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.productions {
            writeln!(
                f,
                "{} -> {}",
                self.form_display(&p.lhs),
                self.form_display(&p.rhs)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{c1, c2, e1, e2};
    use crate::oracle::oracle_post;

    fn staircase(spec: &UpdsSpec, n: usize) -> Configuration {
        let mut upper = vec!["a"; n + 1];
        upper.extend(std::iter::repeat("b").take(n));
        spec.config("p'", &upper, &["bot"]).unwrap()
    }

    #[test]
    fn origin_reaches_initial_set() {
        let spec = e1();
        let ca = c1(&spec);
        let so = single_origin(&spec, &ca).unwrap();
        let reach = oracle_post(&so.spec, [&so.origin], 12, 8).unwrap();
        assert!(reach.contains(&spec.config("p", &[], &["x", "bot"]).unwrap()));
        assert!(reach.contains(&spec.config("p", &[], &["x", "y", "x", "bot"]).unwrap()));
        assert!(!reach.contains(&spec.config("p", &[], &["y", "bot"]).unwrap()));
    }

    #[test]
    fn origin_builds_upper_stacks() {
        let spec = e1();
        let c = spec.config("p", &["a", "b"], &["bot"]).unwrap();
        let ca = ConfigAutomaton::from_config_set(&spec, [&c]).unwrap();
        let so = single_origin(&spec, &ca).unwrap();
        let reach = oracle_post(&so.spec, [&so.origin], 12, 8).unwrap();
        assert!(reach.contains(&c));

        let bare = UpdsSpec::new(&["p", "q"], &["a", "b"]).unwrap();
        let single = bare.config("p", &[], &["a"]).unwrap();
        let ca = ConfigAutomaton::from_config_set(&bare, [&single]).unwrap();
        let so = single_origin(&bare, &ca).unwrap();
        let reach = oracle_post(&so.spec, [&so.origin], 8, 8).unwrap();
        let originals: Vec<_> = reach
            .iter()
            .filter(|c| so.is_original_config(c) && c.upper.is_empty())
            .collect();
        assert_eq!(originals, vec![&single]);
    }

    #[test]
    fn grammar_is_noncontracting() {
        let (s1, s2) = (e1(), e2());
        for (spec, ca) in [(&s1, c1(&s1)), (&s2, c2(&s2))] {
            let g = build_post_grammar(&single_origin(spec, &ca).unwrap());
            assert!(g.is_noncontracting());
        }
    }

    #[test]
    fn staircase_members() {
        let spec = e1();
        let ca = c1(&spec);
        for n in 0..2 {
            assert!(is_reachable(&spec, &ca, &staircase(&spec, n)).unwrap(), "n={n}");
        }
        let c = spec.config("p", &[], &["x", "bot"]).unwrap();
        assert!(is_reachable(&spec, &ca, &c).unwrap());
    }

    #[test]
    fn count_guard_non_members() {
        let spec = e1();
        let ca = c1(&spec);
        let c = spec.config("p'", &["a", "a"], &["bot"]).unwrap();
        assert!(!is_reachable(&spec, &ca, &c).unwrap());
    }

    #[test]
    fn start_and_finish_only() {
        let spec = UpdsSpec::new(&["p"], &["a"]).unwrap();
        let c = spec.config("p", &[], &["a"]).unwrap();
        let ca = ConfigAutomaton::from_config_set(&spec, [&c]).unwrap();
        let so = single_origin(&spec, &ca).unwrap();
        let g = build_post_grammar(&so);
        assert!(grammar_membership(&g, &encode_config(&so.origin)).unwrap());
        let mut w = encode_config(&so.origin);
        w.push(GSym::Sym(Symbol(999)));
        assert!(!grammar_membership(&g, &w).unwrap());
    }

    #[test]
    fn derivable_words_decode_to_reachable() {
        let spec = e1();
        let ca = c1(&spec);
        let so = single_origin(&spec, &ca).unwrap();
        let g = build_post_grammar(&so);
        let words = derivable_words(&g, 6, 1_000_000).unwrap();
        assert!(!words.is_empty());
        let reach = oracle_post(&so.spec, [&so.origin], 30, 4).unwrap();
        for w in &words {
            let c = g.decode(w).expect("well-shaped");
            assert!(reach.contains(&c), "{}", g.form_display(w));
        }
    }

    #[test]
    fn budget_is_reported() {
        let spec = e1();
        let ca = c1(&spec);
        let err = is_reachable_budget(&spec, &ca, &staircase(&spec, 1), 10).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { budget: 10, .. }));
    }
}
