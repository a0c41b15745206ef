//! Pushdown systems with an upper stack.
//!
//! A pop does not destroy the popped symbol: it is appended to the right end
//! of a write-only upper stack. A push overwrites the rightmost upper symbol,
//! if there is one.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Control-state identifier, an index into [`UpdsSpec::states`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub usize);

/// Stack-symbol identifier, an index into [`UpdsSpec::symbols`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub usize);

/// Index of a rule in [`UpdsSpec::rules`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Pop,
    Switch,
    Push,
}

/// What a rule writes in place of the symbol it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Pop,
    Switch(Symbol),
    Push(Symbol, Symbol),
}

impl Action {
    pub fn kind(self) -> RuleKind {
        match self {
            Action::Pop => RuleKind::Pop,
            Action::Switch(_) => RuleKind::Switch,
            Action::Push(..) => RuleKind::Push,
        }
    }

    pub fn written(self) -> Vec<Symbol> {
        match self {
            Action::Pop => vec![],
            Action::Switch(a) => vec![a],
            Action::Push(a, b) => vec![a, b],
        }
    }
}

/// `(from, read) -> (to, written)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub from: State,
    pub read: Symbol,
    pub to: State,
    pub action: Action,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        self.action.kind()
    }
}

/// A system `(P, Γ, Δ)`. Rules keep their declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdsSpec {
    states: Vec<String>,
    symbols: Vec<String>,
    rules: Vec<Rule>,
    state_index: HashMap<String, State>,
    symbol_index: HashMap<String, Symbol>,
}

impl UpdsSpec {
    /// Creates a system without rules. Names must be nonempty and unique
    /// within their namespace.
    pub fn new<S: AsRef<str>>(states: &[S], symbols: &[S]) -> Result<Self> {
        let mut spec = UpdsSpec {
            states: Vec::new(),
            symbols: Vec::new(),
            rules: Vec::new(),
            state_index: HashMap::new(),
            symbol_index: HashMap::new(),
        };
        for s in states {
            spec.add_state(s.as_ref())?;
        }
        for s in symbols {
            spec.add_symbol(s.as_ref())?;
        }
        Ok(spec)
    }

    pub fn add_state(&mut self, name: &str) -> Result<State> {
        if name.is_empty() {
            return Err(Error::Malformed("empty state name".into()));
        }
        if self.state_index.contains_key(name) {
            return Err(Error::Malformed(format!("duplicate state `{name}`")));
        }
        let id = State(self.states.len());
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_symbol(&mut self, name: &str) -> Result<Symbol> {
        if name.is_empty() {
            return Err(Error::Malformed("empty symbol name".into()));
        }
        if self.symbol_index.contains_key(name) {
            return Err(Error::Malformed(format!("duplicate symbol `{name}`")));
        }
        let id = Symbol(self.symbols.len());
        self.symbols.push(name.to_string());
        self.symbol_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_rule(&mut self, rule: Rule) -> Result<RuleId> {
        self.check_state(rule.from)?;
        self.check_state(rule.to)?;
        self.check_symbol(rule.read)?;
        for s in rule.action.written() {
            self.check_symbol(s)?;
        }
        self.rules.push(rule);
        Ok(RuleId(self.rules.len() - 1))
    }

    /// Adds a rule by names; `written` has length 0, 1 or 2.
    pub fn add_rule_named(
        &mut self,
        from: &str,
        read: &str,
        to: &str,
        written: &[&str],
    ) -> Result<RuleId> {
        let from = self.state_id(from)?;
        let to = self.state_id(to)?;
        let read = self.symbol_id(read)?;
        let w = written
            .iter()
            .map(|s| self.symbol_id(s))
            .collect::<Result<Vec<_>>>()?;
        let action = match w.as_slice() {
            [] => Action::Pop,
            [a] => Action::Switch(*a),
            [a, b] => Action::Push(*a, *b),
            _ => {
                return Err(Error::Malformed(format!(
                    "rule writes {} symbols, at most 2 allowed",
                    w.len()
                )))
            }
        };
        self.add_rule(Rule {
            from,
            read,
            to,
            action,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.0]
    }

    pub fn rule_ids(&self) -> impl Iterator<Item = RuleId> + '_ {
        (0..self.rules.len()).map(RuleId)
    }

    pub fn all_states(&self) -> impl Iterator<Item = State> {
        (0..self.states.len()).map(State)
    }

    pub fn all_symbols(&self) -> impl Iterator<Item = Symbol> {
        (0..self.symbols.len()).map(Symbol)
    }

    pub fn state_id(&self, name: &str) -> Result<State> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Malformed(format!("undeclared state `{name}`")))
    }

    pub fn symbol_id(&self, name: &str) -> Result<Symbol> {
        self.symbol_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Malformed(format!("undeclared symbol `{name}`")))
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.state_index.contains_key(name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.symbol_index.contains_key(name)
    }

    pub fn state_name(&self, s: State) -> &str {
        &self.states[s.0]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        &self.symbols[s.0]
    }

    /// Rules reading `read` in control state `from`, in declaration order.
    pub fn rules_from(&self, from: State, read: Symbol) -> impl Iterator<Item = RuleId> + '_ {
        self.rules
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.from == from && r.read == read)
            .map(|(i, _)| RuleId(i))
    }

    /// A copy of this system keeping only the rules whose kind passes `keep`.
    pub fn restricted(&self, keep: impl Fn(RuleKind) -> bool) -> UpdsSpec {
        let mut out = self.clone();
        out.rules.retain(|r| keep(r.kind()));
        out
    }

    fn check_state(&self, s: State) -> Result<()> {
        if s.0 < self.states.len() {
            Ok(())
        } else {
            Err(Error::Malformed(format!("unknown state id {}", s.0)))
        }
    }

    fn check_symbol(&self, s: Symbol) -> Result<()> {
        if s.0 < self.symbols.len() {
            Ok(())
        } else {
            Err(Error::Malformed(format!("unknown symbol id {}", s.0)))
        }
    }

    pub fn check_config(&self, c: &Configuration) -> Result<()> {
        self.check_state(c.state)?;
        for &s in c.upper.iter().chain(&c.lower) {
            self.check_symbol(s)?;
        }
        Ok(())
    }

    pub fn rule_display(&self, id: RuleId) -> String {
        let r = self.rule(id);
        let written: Vec<&str> = r
            .action
            .written()
            .into_iter()
            .map(|s| self.symbol_name(s))
            .collect();
        format!(
            "({}, {}) -> ({}, {})",
            self.state_name(r.from),
            self.symbol_name(r.read),
            self.state_name(r.to),
            if written.is_empty() {
                "ε".to_string()
            } else {
                written.join(" ")
            }
        )
    }

    /// Renders a configuration as `state: upper ^ lower`.
    pub fn config_display(&self, c: &Configuration) -> String {
        let mut out = format!("{}:", self.state_name(c.state));
        for &s in &c.upper {
            out.push(' ');
            out.push_str(self.symbol_name(s));
        }
        out.push_str(" ^");
        for &s in &c.lower {
            out.push(' ');
            out.push_str(self.symbol_name(s));
        }
        out
    }

    /// Builds a configuration from names.
    pub fn config(&self, state: &str, upper: &[&str], lower: &[&str]) -> Result<Configuration> {
        Ok(Configuration {
            state: self.state_id(state)?,
            upper: upper
                .iter()
                .map(|s| self.symbol_id(s))
                .collect::<Result<_>>()?,
            lower: lower
                .iter()
                .map(|s| self.symbol_id(s))
                .collect::<Result<_>>()?,
        })
    }
}

/// `⟨state, upper, lower⟩`. The rightmost upper symbol sits next to the
/// stack pointer; `lower[0]` is the top of the lower stack.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: State,
    pub upper: Vec<Symbol>,
    pub lower: Vec<Symbol>,
}

impl Configuration {
    pub fn new(state: State, upper: Vec<Symbol>, lower: Vec<Symbol>) -> Self {
        Configuration {
            state,
            upper,
            lower,
        }
    }

    /// Combined length of both stacks.
    pub fn size(&self) -> usize {
        self.upper.len() + self.lower.len()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |w: &[Symbol]| {
            w.iter()
                .map(|s| s.0.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        write!(
            f,
            "<{}, [{}], [{}]>",
            self.state.0,
            join(&self.upper),
            join(&self.lower)
        )
    }
}

pub type Trace = Vec<RuleId>;

/// Applies one rule, or returns `None` when it is not enabled.
pub fn apply(rule: &Rule, c: &Configuration) -> Option<Configuration> {
    if c.state != rule.from || c.lower.first() != Some(&rule.read) {
        return None;
    }
    let rest = &c.lower[1..];
    let mut upper = c.upper.clone();
    let mut lower = Vec::with_capacity(rest.len() + 2);
    match rule.action {
        Action::Switch(b) => lower.push(b),
        Action::Pop => upper.push(rule.read),
        Action::Push(b, d) => {
            upper.pop();
            lower.push(b);
            lower.push(d);
        }
    }
    lower.extend_from_slice(rest);
    Some(Configuration {
        state: rule.to,
        upper,
        lower,
    })
}

/// All immediate successors of `c`, in rule declaration order.
pub fn step(spec: &UpdsSpec, c: &Configuration) -> Result<Vec<(RuleId, Configuration)>> {
    spec.check_config(c)?;
    Ok(successors(spec, c))
}

pub(crate) fn successors(spec: &UpdsSpec, c: &Configuration) -> Vec<(RuleId, Configuration)> {
    let Some(&top) = c.lower.first() else {
        return Vec::new();
    };
    spec.rules_from(c.state, top)
        .filter_map(|id| apply(spec.rule(id), c).map(|next| (id, next)))
        .collect()
}

/// Runs `trace` from `c`, failing at the first rule that is not enabled.
pub fn run_trace(spec: &UpdsSpec, c: &Configuration, trace: &[RuleId]) -> Result<Configuration> {
    spec.check_config(c)?;
    let mut cur = c.clone();
    for (index, &id) in trace.iter().enumerate() {
        let rule = spec
            .rules()
            .get(id.0)
            .ok_or_else(|| Error::Malformed(format!("unknown rule id {}", id.0)))?;
        cur = apply(rule, &cur).ok_or(Error::RuleNotEnabled { index })?;
    }
    Ok(cur)
}

/// The virtual upper word induced by any rule sequence from `c`. Control
/// states and the lower stack are ignored.
pub fn upsilon(spec: &UpdsSpec, trace: &[RuleId], c: &Configuration) -> Vec<Symbol> {
    let mut upper = c.upper.clone();
    for &id in trace {
        let rule = spec.rule(id);
        match rule.action {
            Action::Switch(_) => {}
            Action::Pop => upper.push(rule.read),
            Action::Push(..) => {
                upper.pop();
            }
        }
    }
    upper
}

/// Minimal number of blocks, each using only push/switch or only pop/switch
/// rules.
pub fn count_phases(spec: &UpdsSpec, trace: &[RuleId]) -> usize {
    let mut phases = PhaseCount::default();
    for &id in trace {
        phases = phases.then(spec.rule(id).kind());
    }
    phases.count
}

/// Incremental phase counter: `count` blocks so far and the kind of the
/// current block (`None` while it holds only switches).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PhaseCount {
    pub count: usize,
    pub current: Option<RuleKind>,
}

impl PhaseCount {
    /// Appends a rule of `kind` at the end of the trace.
    pub fn then(self, kind: RuleKind) -> PhaseCount {
        self.extend(kind)
    }

    /// Prepends a rule of `kind`. Block counting is symmetric, so this is
    /// the same update as appending, with `current` read as the first block.
    pub fn before(self, kind: RuleKind) -> PhaseCount {
        self.extend(kind)
    }

    fn extend(self, kind: RuleKind) -> PhaseCount {
        match (kind, self.current) {
            (RuleKind::Switch, _) => PhaseCount {
                count: self.count.max(1),
                current: self.current,
            },
            (k, None) => PhaseCount {
                count: self.count.max(1),
                current: Some(k),
            },
            (k, Some(cur)) if k == cur => self,
            (k, Some(_)) => PhaseCount {
                count: self.count + 1,
                current: Some(k),
            },
        }
    }
}
