//! Regular sets of configurations.
//!
//! A configuration `⟨p, u, l⟩` is encoded as the two-track word
//! `bar(u)·l` read by the component automaton of `p`. Barred letters are
//! [`Letter::Upper`], plain ones [`Letter::Lower`]. Each component splits its
//! states into an upper and a lower zone so that every accepted word has
//! all its upper letters before its lower letters.

use std::collections::BTreeSet;

use super::nfa::Nfa;
use crate::error::{Error, Result};
use crate::system::{Configuration, State, Symbol, UpdsSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Upper(Symbol),
    Lower(Symbol),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Zone {
    Upper,
    Lower,
}

/// The two-track encoding of `upper`/`lower`.
pub fn encode(upper: &[Symbol], lower: &[Symbol]) -> Vec<Letter> {
    upper
        .iter()
        .map(|&s| Letter::Upper(s))
        .chain(lower.iter().map(|&s| Letter::Lower(s)))
        .collect()
}

/// Splits a two-track word back into its upper and lower parts. Returns
/// `None` if a barred letter follows a plain one.
pub fn decode(word: &[Letter]) -> Option<(Vec<Symbol>, Vec<Symbol>)> {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for l in word {
        match *l {
            Letter::Upper(s) if lower.is_empty() => upper.push(s),
            Letter::Upper(_) => return None,
            Letter::Lower(s) => lower.push(s),
        }
    }
    Some((upper, lower))
}

/// One control state's slice of a configuration set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    nfa: Nfa<Letter>,
    zones: Vec<Zone>,
}

impl Default for Component {
    fn default() -> Self {
        Component::empty()
    }
}

impl Component {
    pub fn empty() -> Self {
        Component {
            nfa: Nfa::new(),
            zones: Vec::new(),
        }
    }

    /// Wraps an automaton, checking the zone discipline.
    pub fn new(nfa: Nfa<Letter>, zones: Vec<Zone>) -> Result<Self> {
        let c = Component { nfa, zones };
        c.check_zones()?;
        Ok(c)
    }

    /// `{bar(u)·l | u ∈ L(upper), l ∈ L(lower)}`.
    pub fn concat(upper: &Nfa<Symbol>, lower: &Nfa<Symbol>) -> Self {
        let mut nfa = Nfa::new();
        let off_u = nfa.embed(&upper.map_labels(|&s| Some(Letter::Upper(s))));
        let off_l = nfa.embed(&lower.map_labels(|&s| Some(Letter::Lower(s))));
        let mut zones = vec![Zone::Upper; off_l];
        zones.resize(nfa.num_states(), Zone::Lower);
        for &f in upper.finals() {
            for &i in lower.initial() {
                nfa.add_edge(f + off_u, None, i + off_l);
            }
        }
        for &i in upper.initial() {
            nfa.set_initial(i + off_u);
        }
        for &f in lower.finals() {
            nfa.set_final(f + off_l);
        }
        Component { nfa, zones }
    }

    pub fn from_word(upper: &[Symbol], lower: &[Symbol]) -> Self {
        Component::concat(&Nfa::word(upper), &Nfa::word(lower))
    }

    pub fn nfa(&self) -> &Nfa<Letter> {
        &self.nfa
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn zone(&self, q: usize) -> Zone {
        self.zones[q]
    }

    fn check_zones(&self) -> Result<()> {
        if self.zones.len() != self.nfa.num_states() {
            return Err(Error::Malformed("zone table size mismatch".into()));
        }
        if !self.zone_sound() {
            return Err(Error::Malformed(
                "a plain edge may precede a barred edge".into(),
            ));
        }
        Ok(())
    }

    /// Barred edges stay inside the upper zone, plain edges end in the lower
    /// zone, and no ε-edge leaves the lower zone for the upper one.
    pub fn zone_sound(&self) -> bool {
        self.nfa.edges().all(|(q, l, t)| match l {
            Some(Letter::Upper(_)) => self.zones[q] == Zone::Upper && self.zones[t] == Zone::Upper,
            Some(Letter::Lower(_)) => self.zones[t] == Zone::Lower,
            None => !(self.zones[q] == Zone::Lower && self.zones[t] == Zone::Upper),
        })
    }

    pub fn accepts(&self, upper: &[Symbol], lower: &[Symbol]) -> bool {
        self.nfa.accepts(&encode(upper, lower))
    }

    pub fn is_empty(&self) -> bool {
        self.nfa.is_empty()
    }

    pub fn intersect(&self, other: &Component) -> Component {
        let (nfa, pairs) = self
            .nfa
            .product_with(&other.nfa, |a, b| (a == b).then_some(*a));
        let zones = pairs
            .iter()
            .map(|&(a, b)| {
                if self.zones[a] == Zone::Lower || other.zones[b] == Zone::Lower {
                    Zone::Lower
                } else {
                    Zone::Upper
                }
            })
            .collect();
        Component { nfa, zones }
    }

    pub fn union(&self, other: &Component) -> Component {
        let nfa = self.nfa.union(&other.nfa);
        let mut zones = self.zones.clone();
        zones.extend_from_slice(&other.zones);
        Component { nfa, zones }
    }

    /// Lower words, upper letters erased.
    pub fn project_lower(&self) -> Nfa<Symbol> {
        self.nfa.map_labels(|l| match *l {
            Letter::Lower(s) => Some(s),
            Letter::Upper(_) => None,
        })
    }

    /// Upper words, lower letters erased.
    pub fn project_upper(&self) -> Nfa<Symbol> {
        self.nfa.map_labels(|l| match *l {
            Letter::Upper(s) => Some(s),
            Letter::Lower(_) => None,
        })
    }

    /// ε-free, trimmed, with trivially equivalent states merged.
    pub fn normalized(&self) -> Component {
        let nfa = self.nfa.remove_epsilons();
        let (nfa, map) = nfa.trim_with_map();
        let mut zones = vec![Zone::Upper; nfa.num_states()];
        for (old, new) in map.iter().enumerate() {
            if let Some(n) = new {
                zones[*n] = self.zones[old];
            }
        }
        let (nfa, zones) = nfa.merge_equivalent_tagged(&zones);
        Component { nfa, zones }
    }

    /// Shortest accepted `(upper, lower)` pair.
    pub fn witness(&self) -> Option<(Vec<Symbol>, Vec<Symbol>)> {
        self.nfa.shortest_word().and_then(|w| decode(&w))
    }

    /// All accepted `(upper, lower)` pairs with `|upper| + |lower| <= max`.
    pub fn pairs_up_to(&self, max: usize) -> BTreeSet<(Vec<Symbol>, Vec<Symbol>)> {
        self.nfa
            .words_up_to(max)
            .into_iter()
            .filter_map(|w| decode(&w))
            .collect()
    }
}

/// A regular set of configurations: one [`Component`] per control state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigAutomaton {
    num_symbols: usize,
    components: Vec<Component>,
}

impl ConfigAutomaton {
    /// The empty set over `spec`'s states and alphabet.
    pub fn empty(spec: &UpdsSpec) -> Self {
        Self::empty_sized(spec.num_states(), spec.num_symbols())
    }

    pub fn empty_sized(num_states: usize, num_symbols: usize) -> Self {
        ConfigAutomaton {
            num_symbols,
            components: vec![Component::empty(); num_states],
        }
    }

    pub fn num_states(&self) -> usize {
        self.components.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    pub fn component(&self, p: State) -> Option<&Component> {
        self.components.get(p.0)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn set_component(&mut self, p: State, c: Component) {
        self.components[p.0] = c;
    }

    /// Adds `c`'s language to the slice of `p`.
    pub fn add_to_component(&mut self, p: State, c: &Component) {
        let cur = &self.components[p.0];
        self.components[p.0] = if cur.nfa.num_states() == 0 {
            c.clone()
        } else {
            cur.union(c)
        };
    }

    pub fn accepts(&self, c: &Configuration) -> bool {
        self.component(c.state)
            .is_some_and(|comp| comp.accepts(&c.upper, &c.lower))
    }

    /// Accepts exactly the given configurations.
    pub fn from_config_set<'a>(
        spec: &UpdsSpec,
        configs: impl IntoIterator<Item = &'a Configuration>,
    ) -> Result<Self> {
        let mut out = ConfigAutomaton::empty(spec);
        for c in configs {
            spec.check_config(c)?;
            out.add_to_component(c.state, &Component::from_word(&c.upper, &c.lower));
        }
        Ok(out.normalized())
    }

    fn check_compatible(&self, other: &ConfigAutomaton) -> Result<()> {
        if self.num_states() != other.num_states() || self.num_symbols != other.num_symbols {
            return Err(Error::AlphabetMismatch(format!(
                "{} states / {} symbols vs {} states / {} symbols",
                self.num_states(),
                self.num_symbols,
                other.num_states(),
                other.num_symbols
            )));
        }
        Ok(())
    }

    pub fn intersect(&self, other: &ConfigAutomaton) -> Result<ConfigAutomaton> {
        self.check_compatible(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.intersect(b).normalized())
            .collect();
        Ok(ConfigAutomaton {
            num_symbols: self.num_symbols,
            components,
        })
    }

    pub fn union(&self, other: &ConfigAutomaton) -> Result<ConfigAutomaton> {
        self.check_compatible(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.union(b))
            .collect();
        Ok(ConfigAutomaton {
            num_symbols: self.num_symbols,
            components,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.components.iter().all(Component::is_empty)
    }

    /// Per-state automata for `C_low`.
    pub fn project_lower(&self) -> Vec<Nfa<Symbol>> {
        self.components.iter().map(Component::project_lower).collect()
    }

    /// Per-state automata for `C_up`.
    pub fn project_upper(&self) -> Vec<Nfa<Symbol>> {
        self.components.iter().map(Component::project_upper).collect()
    }

    pub fn normalized(&self) -> ConfigAutomaton {
        ConfigAutomaton {
            num_symbols: self.num_symbols,
            components: self.components.iter().map(Component::normalized).collect(),
        }
    }

    /// A shortest member, searching states in index order.
    pub fn witness(&self) -> Option<Configuration> {
        self.components
            .iter()
            .enumerate()
            .filter_map(|(p, comp)| {
                comp.witness()
                    .map(|(u, l)| Configuration::new(State(p), u, l))
            })
            .min_by_key(|c| (c.size(), c.clone()))
    }

    /// All members with total stack size at most `max`.
    pub fn configs_up_to(&self, max: usize) -> BTreeSet<Configuration> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(p, comp)| {
                comp.pairs_up_to(max)
                    .into_iter()
                    .map(move |(u, l)| Configuration::new(State(p), u, l))
            })
            .collect()
    }

    /// Total number of automaton states over all components.
    pub fn size(&self) -> usize {
        self.components.iter().map(|c| c.nfa.num_states()).sum()
    }
}

/// Every configuration over `spec` with total stack size at most `max`.
pub fn all_configs_up_to(spec: &UpdsSpec, max: usize) -> Vec<Configuration> {
    let words = all_words_up_to(spec.num_symbols(), max);
    let mut out = Vec::new();
    for p in spec.all_states() {
        for w in &words {
            for split in 0..=w.len() {
                out.push(Configuration::new(
                    p,
                    w[..split].to_vec(),
                    w[split..].to_vec(),
                ));
            }
        }
    }
    out
}

/// Every word over `0..num_symbols` of length at most `max`.
pub fn all_words_up_to(num_symbols: usize, max: usize) -> Vec<Vec<Symbol>> {
    let mut out: Vec<Vec<Symbol>> = vec![Vec::new()];
    let mut layer: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for s in 0..num_symbols {
                let mut w2 = w.clone();
                w2.push(Symbol(s));
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{c1, e1};

    #[test]
    fn c1_membership() {
        let spec = e1();
        let c1 = c1(&spec);
        assert!(c1.accepts(&spec.config("p", &[], &["x", "y", "x", "bot"]).unwrap()));
        assert!(c1.accepts(&spec.config("p", &[], &["x", "bot"]).unwrap()));
        assert!(!c1.accepts(&spec.config("p", &["a"], &["x", "bot"]).unwrap()));
        assert!(!c1.accepts(&spec.config("p'", &[], &["x", "bot"]).unwrap()));
        assert!(!c1.accepts(&spec.config("p", &[], &["x", "y", "bot"]).unwrap()));
        // out-of-range state id
        assert!(!c1.accepts(&Configuration::new(State(9), vec![], vec![])));
    }

    #[test]
    fn from_config_set_accepts_exactly() {
        let spec = e1();
        let single = spec.config("p", &[], &["bot"]).unwrap();
        let a = ConfigAutomaton::from_config_set(&spec, [&single]).unwrap();
        assert_eq!(a.configs_up_to(4), BTreeSet::from([single.clone()]));

        let none = ConfigAutomaton::from_config_set(&spec, []).unwrap();
        assert!(none.is_empty());

        let set = [
            spec.config("p", &["a"], &["bot"]).unwrap(),
            spec.config("p'", &[], &["bot"]).unwrap(),
        ];
        let a = ConfigAutomaton::from_config_set(&spec, &set).unwrap();
        let expected: BTreeSet<_> = set.iter().cloned().collect();
        let brute: BTreeSet<_> = all_configs_up_to(&spec, 3)
            .into_iter()
            .filter(|c| a.accepts(c))
            .collect();
        assert_eq!(brute, expected);
    }

    #[test]
    fn intersect_with_self_and_empty() {
        let spec = e1();
        let c1 = c1(&spec);
        let same = c1.intersect(&c1).unwrap();
        assert_eq!(same.configs_up_to(6), c1.configs_up_to(6));
        let empty = ConfigAutomaton::empty(&spec);
        assert!(c1.intersect(&empty).unwrap().is_empty());
        assert!(empty.is_empty());
    }

    #[test]
    fn intersect_mismatch_is_an_error() {
        let spec = e1();
        let other = ConfigAutomaton::empty_sized(1, 2);
        assert!(matches!(
            c1(&spec).intersect(&other),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn projections_of_c1() {
        let spec = e1();
        let p = spec.state_id("p").unwrap();
        let low = &c1(&spec).project_lower()[p.0];
        let w = |names: &[&str]| -> Vec<Symbol> {
            names.iter().map(|n| spec.symbol_id(n).unwrap()).collect()
        };
        assert!(low.accepts(&w(&["x", "y", "x", "y", "x", "bot"])));
        assert!(!low.accepts(&w(&["x", "y", "bot"])));

        let single = spec.config("p", &["a", "b"], &["x"]).unwrap();
        let up = ConfigAutomaton::from_config_set(&spec, [&single])
            .unwrap()
            .project_upper();
        assert_eq!(up[p.0].words_up_to(4), BTreeSet::from([w(&["a", "b"])]));
    }

    #[test]
    fn decode_rejects_interleaving() {
        let a = Symbol(0);
        assert_eq!(decode(&[Letter::Lower(a), Letter::Upper(a)]), None);
        assert_eq!(
            decode(&[Letter::Upper(a), Letter::Lower(a)]),
            Some((vec![a], vec![a]))
        );
    }
}
