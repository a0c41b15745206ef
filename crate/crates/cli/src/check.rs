//! Safety checkers: an under-approximation proves Unsafe, the
//! over-approximation proves Safe.

use std::fmt;

use upds_core::fsa::{parse_plain, Component, ConfigAutomaton, Nfa};
use upds_core::kphase::bounded_phase_pre_star;
use upds_core::oracle::find_trace;
use upds_core::upperapprox::overapprox_post;
use upds_core::{Configuration, Error, Symbol, Trace, UpdsSpec};

use crate::model::{ModelError, ModelFile, ModelResult, RESERVED_SYMBOLS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Phase bound for the under-approximation.
    pub k: usize,
    /// Witness search: maximal trace length.
    pub depth: usize,
    /// Witness search: maximal configuration size.
    pub size_cap: usize,
    /// Witness search: node budget per candidate.
    pub budget: usize,
    /// Candidates from the under-approximation tried before giving up.
    pub max_candidates: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            k: 3,
            depth: 24,
            size_cap: 16,
            budget: 200_000,
            max_candidates: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// `start` reaches the forbidden `reached` along `trace`.
    Unsafe {
        start: Configuration,
        trace: Trace,
        reached: Configuration,
    },
    Safe,
    Unknown { note: String },
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Safe => 0,
            Verdict::Unsafe { .. } => 1,
            Verdict::Unknown { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Safe => "safe",
            Verdict::Unsafe { .. } => "unsafe",
            Verdict::Unknown { .. } => "unknown",
        }
    }
}

/// A verdict plus the system it talks about and the bounds used.
#[derive(Debug, Clone)]
pub struct Report {
    pub verdict: Verdict,
    pub spec: UpdsSpec,
    pub options: CheckOptions,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict.name())?;
        match &self.verdict {
            Verdict::Unsafe {
                start,
                trace,
                reached,
            } => {
                writeln!(f, "from: {}", self.spec.config_display(start))?;
                for &id in trace {
                    writeln!(f, "  {}", self.spec.rule_display(id))?;
                }
                writeln!(f, "reaches: {}", self.spec.config_display(reached))?;
            }
            Verdict::Unknown { note } => writeln!(f, "note: {note}")?,
            Verdict::Safe => {}
        }
        write!(
            f,
            "k = {}, witness depth = {}, size cap = {}",
            self.options.k, self.options.depth, self.options.size_cap
        )
    }
}

fn star(symbols: impl IntoIterator<Item = Symbol>) -> Nfa<Symbol> {
    let mut n = Nfa::new();
    let q = n.add_state();
    n.set_initial(q);
    n.set_final(q);
    for s in symbols {
        n.add_edge(q, Some(s), q);
    }
    n
}

/// `upper × Γ*` in every control state.
fn forbidden(spec: &UpdsSpec, upper: Nfa<Symbol>) -> ConfigAutomaton {
    let lower = star(spec.all_symbols());
    let mut x = ConfigAutomaton::empty(spec);
    for p in spec.all_states() {
        x.set_component(p, Component::concat(&upper, &lower));
    }
    x
}

/// Decides whether `forbidden` is reachable from `init`, as far as the
/// approximations allow.
pub fn check_safety(
    spec: &UpdsSpec,
    init: &ConfigAutomaton,
    forbidden: &ConfigAutomaton,
    opts: &CheckOptions,
) -> ModelResult<Verdict> {
    let under = bounded_phase_pre_star(spec, forbidden, opts.k)?;
    let hits = under.intersect(init)?;
    if !hits.is_empty() {
        let mut candidates: Vec<Configuration> = hits.configs_up_to(opts.size_cap).into_iter().collect();
        candidates.sort_by_key(|c| (c.size(), c.clone()));
        candidates.truncate(opts.max_candidates);
        for start in candidates {
            let found = find_trace(spec, &start, |c| forbidden.accepts(c), opts.depth, opts.size_cap, opts.budget);
            match found {
                Ok(Some(trace)) => {
                    let reached = upds_core::run_trace(spec, &start, &trace)?;
                    return Ok(Verdict::Unsafe {
                        start,
                        trace,
                        reached,
                    });
                }
                Ok(None) | Err(Error::ResourceLimit { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    let over = overapprox_post(spec, init)?;
    if over.intersect(forbidden)?.is_empty() {
        return Ok(Verdict::Safe);
    }
    let note = if hits.is_empty() {
        format!("no witness within {} phases and the over-approximation meets the forbidden set", opts.k)
    } else {
        "the under-approximation meets the initial set but no witness trace was replayed within budget".to_string()
    };
    Ok(Verdict::Unknown { note })
}

/// Stack overflow: from `P × $top $fill^m × L`, can `$top` be overwritten?
pub fn check_stack_overflow(model: &ModelFile, m: usize, lower: &str, opts: &CheckOptions) -> ModelResult<Report> {
    let mut spec = model.spec.clone();
    for name in RESERVED_SYMBOLS {
        if spec.has_symbol(name) {
            return Err(upds_core::Error::Precondition(format!("`{name}` is reserved")).into());
        }
    }
    let lower_nfa = parse_plain(lower, &|n: &str| model.spec.symbol_id(n).ok())
        .map_err(|e| ModelError::Syntax {
            line: 1,
            col: 1,
            msg: format!("bad lower expression: {e}"),
        })?
        .to_nfa();
    let top = spec.add_symbol(RESERVED_SYMBOLS[0])?;
    let fill = spec.add_symbol(RESERVED_SYMBOLS[1])?;
    if spec.rules().iter().any(|r| r.read == top || r.action.written().contains(&top)) {
        return Err(upds_core::Error::Precondition("`$top` appears in a rule".into()).into());
    }
    let mut upper = vec![top];
    upper.extend(std::iter::repeat(fill).take(m));
    let mut init = ConfigAutomaton::empty(&spec);
    for p in spec.all_states() {
        init.set_component(p, Component::concat(&Nfa::word(&upper), &lower_nfa));
    }
    let x = forbidden(&spec, star(spec.all_symbols().filter(|&s| s != top)));
    let verdict = check_safety(&spec, &init, &x, opts)?;
    Ok(Report {
        verdict,
        spec,
        options: *opts,
    })
}

/// Upper-stack read: from set `init`, can `a` sit just above the stack
/// pointer?
pub fn check_upper_read(model: &ModelFile, init: &str, a: &str, opts: &CheckOptions) -> ModelResult<Report> {
    let spec = &model.spec;
    let a = spec.symbol_id(a)?;
    let ca = model.config_set(init)?;
    let mut upper = Nfa::new();
    let q = upper.add_state();
    let end = upper.add_state();
    upper.set_initial(q);
    upper.set_final(end);
    for s in spec.all_symbols() {
        upper.add_edge(q, Some(s), q);
    }
    upper.add_edge(q, Some(a), end);
    let x = forbidden(spec, upper);
    let verdict = check_safety(spec, &ca, &x, opts)?;
    Ok(Report {
        verdict,
        spec: spec.clone(),
        options: *opts,
    })
}
