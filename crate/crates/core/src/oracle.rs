//! Bounded explicit-state exploration.
//!
//! These searches are exact on the region they explore and serve as ground
//! truth for the symbolic constructions. Search is breadth-first by trace
//! length; successors are generated in rule declaration order.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::system::{
    apply, successors, Action, Configuration, PhaseCount, RuleId, State, Symbol, Trace, UpdsSpec,
};

pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

/// Every configuration reachable from `initial` in at most `depth` steps,
/// never passing through a configuration larger than `size_cap`.
pub fn oracle_post<'a>(
    spec: &UpdsSpec,
    initial: impl IntoIterator<Item = &'a Configuration>,
    depth: usize,
    size_cap: usize,
) -> Result<BTreeSet<Configuration>> {
    oracle_post_budget(spec, initial, depth, size_cap, DEFAULT_NODE_BUDGET)
}

pub fn oracle_post_budget<'a>(
    spec: &UpdsSpec,
    initial: impl IntoIterator<Item = &'a Configuration>,
    depth: usize,
    size_cap: usize,
    budget: usize,
) -> Result<BTreeSet<Configuration>> {
    let mut seen: BTreeSet<Configuration> = BTreeSet::new();
    let mut frontier: Vec<Configuration> = Vec::new();
    for c in initial {
        spec.check_config(c)?;
        if seen.insert(c.clone()) {
            frontier.push(c.clone());
        }
    }
    for _ in 0..depth {
        let mut next = Vec::new();
        for c in &frontier {
            for (_, d) in successors(spec, c) {
                if d.size() <= size_cap && !seen.contains(&d) {
                    seen.insert(d.clone());
                    next.push(d);
                    if seen.len() > budget {
                        return Err(Error::ResourceLimit {
                            explored: seen.len(),
                            budget,
                        });
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(seen)
}

/// One run: where it starts, the rules it uses, where it ends.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Run {
    pub start: Configuration,
    pub trace: Trace,
    pub end: Configuration,
}

/// All runs of length at most `depth` from `initial` (including the empty
/// run of each start), staying within `size_cap`.
pub fn oracle_runs<'a>(
    spec: &UpdsSpec,
    initial: impl IntoIterator<Item = &'a Configuration>,
    depth: usize,
    size_cap: usize,
) -> Vec<Run> {
    let mut out = Vec::new();
    for c in initial {
        let mut stack = vec![(Vec::new(), c.clone())];
        while let Some((trace, cur)) = stack.pop() {
            if trace.len() < depth {
                for (id, next) in successors(spec, &cur).into_iter().rev() {
                    if next.size() <= size_cap {
                        let mut t = trace.clone();
                        t.push(id);
                        stack.push((t, next));
                    }
                }
            }
            out.push(Run {
                start: c.clone(),
                trace,
                end: cur,
            });
        }
    }
    out
}

/// Shortest trace from `from` to a configuration satisfying `goal`.
pub fn find_trace(
    spec: &UpdsSpec,
    from: &Configuration,
    goal: impl Fn(&Configuration) -> bool,
    depth: usize,
    size_cap: usize,
    budget: usize,
) -> Result<Option<Trace>> {
    spec.check_config(from)?;
    let mut parent: HashMap<Configuration, Option<(Configuration, RuleId)>> = HashMap::new();
    parent.insert(from.clone(), None);
    let mut queue = VecDeque::from([(from.clone(), 0usize)]);
    while let Some((c, d)) = queue.pop_front() {
        if goal(&c) {
            let mut trace = Vec::new();
            let mut cur = c;
            while let Some(Some((prev, id))) = parent.get(&cur).cloned() {
                trace.push(id);
                cur = prev;
            }
            trace.reverse();
            return Ok(Some(trace));
        }
        if d == depth {
            continue;
        }
        for (id, next) in successors(spec, &c) {
            if next.size() <= size_cap && !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((c.clone(), id)));
                if parent.len() > budget {
                    return Err(Error::ResourceLimit {
                        explored: parent.len(),
                        budget,
                    });
                }
                queue.push_back((next, d + 1));
            }
        }
    }
    Ok(None)
}

/// Like [`find_trace`], restricted to traces with at most `max_phases`
/// phases.
pub fn find_trace_phased(
    spec: &UpdsSpec,
    from: &Configuration,
    goal: impl Fn(&Configuration) -> bool,
    depth: usize,
    max_phases: usize,
    size_cap: usize,
) -> Option<Trace> {
    let mut parent: HashMap<(Configuration, PhaseCount), Option<((Configuration, PhaseCount), RuleId)>> =
        HashMap::new();
    let start = (from.clone(), PhaseCount::default());
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((node, d)) = queue.pop_front() {
        if goal(&node.0) {
            let mut trace = Vec::new();
            let mut cur = node;
            while let Some(Some((prev, id))) = parent.get(&cur).cloned() {
                trace.push(id);
                cur = prev;
            }
            trace.reverse();
            return Some(trace);
        }
        if d == depth {
            continue;
        }
        for (id, next) in successors(spec, &node.0) {
            let ph = node.1.then(spec.rule(id).kind());
            if ph.count <= max_phases && next.size() <= size_cap {
                let key = (next, ph);
                if !parent.contains_key(&key) {
                    parent.insert(key.clone(), Some((node.clone(), id)));
                    queue.push_back((key, d + 1));
                }
            }
        }
    }
    None
}

/// All immediate predecessors of `c`, in rule declaration order.
pub fn inverse_step(spec: &UpdsSpec, c: &Configuration) -> Vec<(RuleId, Configuration)> {
    let mut out = Vec::new();
    for id in spec.rule_ids() {
        let rule = spec.rule(id);
        if rule.to != c.state {
            continue;
        }
        match rule.action {
            Action::Switch(b) => {
                if c.lower.first() == Some(&b) {
                    let mut lower = c.lower.clone();
                    lower[0] = rule.read;
                    out.push((id, Configuration::new(rule.from, c.upper.clone(), lower)));
                }
            }
            Action::Pop => {
                if c.upper.last() == Some(&rule.read) {
                    let mut upper = c.upper.clone();
                    upper.pop();
                    let mut lower = vec![rule.read];
                    lower.extend_from_slice(&c.lower);
                    out.push((id, Configuration::new(rule.from, upper, lower)));
                }
            }
            Action::Push(b, d) => {
                if c.lower.len() >= 2 && c.lower[0] == b && c.lower[1] == d {
                    let mut lower = vec![rule.read];
                    lower.extend_from_slice(&c.lower[2..]);
                    for x in spec.all_symbols() {
                        let mut upper = c.upper.clone();
                        upper.push(x);
                        out.push((id, Configuration::new(rule.from, upper, lower.clone())));
                    }
                    if c.upper.is_empty() {
                        out.push((id, Configuration::new(rule.from, Vec::new(), lower)));
                    }
                }
            }
        }
    }
    out
}

/// Every configuration within `size_cap` that reaches some target by a
/// trace of length at most `depth` with at most `k` phases. Computed by
/// backward search from the targets, tracking the phase count of the trace
/// suffix explored so far.
pub fn oracle_pre_kphase<'a>(
    spec: &UpdsSpec,
    targets: impl IntoIterator<Item = &'a Configuration>,
    depth: usize,
    k: usize,
    size_cap: usize,
) -> Result<BTreeSet<Configuration>> {
    oracle_pre_kphase_budget(spec, targets, depth, k, size_cap, DEFAULT_NODE_BUDGET)
}

pub fn oracle_pre_kphase_budget<'a>(
    spec: &UpdsSpec,
    targets: impl IntoIterator<Item = &'a Configuration>,
    depth: usize,
    k: usize,
    size_cap: usize,
    budget: usize,
) -> Result<BTreeSet<Configuration>> {
    let mut result: BTreeSet<Configuration> = BTreeSet::new();
    let mut visited: HashSet<(Configuration, PhaseCount)> = HashSet::new();
    let mut frontier: Vec<(Configuration, PhaseCount)> = Vec::new();
    for t in targets {
        spec.check_config(t)?;
        result.insert(t.clone());
        let node = (t.clone(), PhaseCount::default());
        if visited.insert(node.clone()) {
            frontier.push(node);
        }
    }
    for _ in 0..depth {
        let mut next = Vec::new();
        for (c, ph) in &frontier {
            for (id, pred) in inverse_step(spec, c) {
                let ph2 = ph.before(spec.rule(id).kind());
                if ph2.count > k || pred.size() > size_cap {
                    continue;
                }
                let node = (pred, ph2);
                if !visited.contains(&node) {
                    result.insert(node.0.clone());
                    visited.insert(node.clone());
                    next.push(node);
                    if visited.len() > budget {
                        return Err(Error::ResourceLimit {
                            explored: visited.len(),
                            budget,
                        });
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(result)
}

/// A configuration of the plain pushdown system: state and stack.
pub type LowerConfig = (State, Vec<Symbol>);

/// Successors under ordinary pushdown semantics (no upper stack).
pub fn pds_successors(spec: &UpdsSpec, c: &LowerConfig) -> Vec<(RuleId, LowerConfig)> {
    let Some(&top) = c.1.first() else {
        return Vec::new();
    };
    spec.rules_from(c.0, top)
        .map(|id| {
            let rule = spec.rule(id);
            let mut stack = rule.action.written();
            stack.extend_from_slice(&c.1[1..]);
            (id, (rule.to, stack))
        })
        .collect()
}

/// Forward closure under pushdown semantics, bounded like [`oracle_post`].
pub fn oracle_pds_post<'a>(
    spec: &UpdsSpec,
    initial: impl IntoIterator<Item = &'a LowerConfig>,
    depth: usize,
    size_cap: usize,
) -> BTreeSet<LowerConfig> {
    let mut seen: BTreeSet<LowerConfig> = initial.into_iter().cloned().collect();
    let mut frontier: Vec<LowerConfig> = seen.iter().cloned().collect();
    for _ in 0..depth {
        let mut next = Vec::new();
        for c in &frontier {
            for (_, d) in pds_successors(spec, c) {
                if d.1.len() <= size_cap && seen.insert(d.clone()) {
                    next.push(d);
                }
            }
        }
        frontier = next;
    }
    seen
}

/// Backward closure under pushdown semantics: every stack of length at most
/// `size_cap` that reaches a target within `depth` steps.
pub fn oracle_pds_pre(
    spec: &UpdsSpec,
    targets: &BTreeSet<LowerConfig>,
    depth: usize,
    size_cap: usize,
) -> BTreeSet<LowerConfig> {
    let candidates = crate::fsa::all_words_up_to(spec.num_symbols(), size_cap);
    let mut out = BTreeSet::new();
    for p in spec.all_states() {
        for w in &candidates {
            let start = (p, w.clone());
            let reached = oracle_pds_post(spec, [&start], depth, usize::MAX);
            if reached.iter().any(|c| targets.contains(c)) {
                out.insert(start);
            }
        }
    }
    out
}

/// Set of traces of length at most `depth` under the upper-stack semantics.
pub fn trace_set<'a>(
    spec: &UpdsSpec,
    initial: impl IntoIterator<Item = &'a Configuration>,
    depth: usize,
) -> BTreeSet<Trace> {
    oracle_runs(spec, initial, depth, usize::MAX)
        .into_iter()
        .map(|r| r.trace)
        .collect()
}

/// Set of traces of length at most `depth` under pushdown semantics.
pub fn pds_trace_set<'a>(
    spec: &UpdsSpec,
    initial: impl IntoIterator<Item = &'a LowerConfig>,
    depth: usize,
) -> BTreeSet<Trace> {
    let mut out = BTreeSet::new();
    for c in initial {
        let mut stack = vec![(Vec::new(), c.clone())];
        while let Some((trace, cur)) = stack.pop() {
            if trace.len() < depth {
                for (id, next) in pds_successors(spec, &cur) {
                    let mut t = trace.clone();
                    t.push(id);
                    stack.push((t, next));
                }
            }
            out.insert(trace);
        }
    }
    out
}

/// Whether `trace` can be replayed from `c`; the end configuration if so.
pub fn replay(spec: &UpdsSpec, c: &Configuration, trace: &[RuleId]) -> Option<Configuration> {
    let mut cur = c.clone();
    for &id in trace {
        cur = apply(spec.rule(id), &cur)?;
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{e1, e2, E2_C0, E2_RA, E2_RB};
    use crate::system::{count_phases, run_trace, upsilon};

    #[test]
    fn post_examples() {
        let spec = e1();
        let start = spec.config("p", &[], &["x", "bot"]).unwrap();
        let reach = oracle_post(&spec, [&start], 2, 10).unwrap();
        assert!(reach.contains(&spec.config("p", &["a"], &["bot"]).unwrap()));

        let s: BTreeSet<Configuration> = [start.clone()].into();
        assert_eq!(oracle_post(&spec, &s, 0, 0).unwrap(), s);

        let start = spec.config("p", &[], &["x", "y", "x", "bot"]).unwrap();
        let reach = oracle_post(&spec, [&start], 12, 12).unwrap();
        assert!(reach.contains(&spec.config("p'", &["a", "a", "b"], &["bot"]).unwrap()));
    }

    #[test]
    fn post_budget_is_enforced() {
        let spec = e1();
        let start = spec.config("p", &[], &["x", "y", "x", "bot"]).unwrap();
        let err = oracle_post_budget(&spec, [&start], 12, 12, 5).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { budget: 5, .. }));
    }

    #[test]
    fn pre_kphase_examples() {
        let spec = e2();
        let target = spec.config("p", &["a", "b"], &["c"]).unwrap();
        let src = spec.config("p", &["b"], &["c", "c"]).unwrap();
        let t = [C0_RA_RB].concat();
        assert_eq!(run_trace(&spec, &src, &t).unwrap(), target);
        assert_eq!(count_phases(&spec, &t), 2);
        assert!(oracle_pre_kphase(&spec, [&target], 4, 2, 8).unwrap().contains(&src));
        assert!(!oracle_pre_kphase(&spec, [&target], 4, 1, 8).unwrap().contains(&src));

        let empty = UpdsSpec::new(&["p"], &["a"]).unwrap();
        let t = empty.config("p", &["a"], &["a"]).unwrap();
        let set: BTreeSet<_> = [t].into();
        assert_eq!(oracle_pre_kphase(&empty, &set, 5, 3, 8).unwrap(), set);
    }

    const C0_RA_RB: [RuleId; 3] = [E2_C0, E2_RA, E2_RB];

    #[test]
    fn inverse_step_matches_forward_step() {
        let spec = e1();
        let configs = crate::fsa::all_configs_up_to(&spec, 3);
        for c in &configs {
            for (id, d) in successors(&spec, c) {
                assert!(inverse_step(&spec, &d).contains(&(id, c.clone())), "{c} -> {d}");
            }
            for (id, b) in inverse_step(&spec, c) {
                assert_eq!(apply(spec.rule(id), &b).as_ref(), Some(c));
            }
        }
    }

    #[test]
    fn upsilon_agrees_with_runs() {
        let spec = e1();
        let start = spec.config("p", &[], &["x", "y", "x", "bot"]).unwrap();
        for run in oracle_runs(&spec, [&start], 8, 12) {
            assert_eq!(upsilon(&spec, &run.trace, &start), run.end.upper);
            assert_eq!(replay(&spec, &start, &run.trace), Some(run.end));
        }
    }

    #[test]
    fn find_trace_returns_shortest() {
        let spec = e1();
        let start = spec.config("p", &[], &["x", "bot"]).unwrap();
        let goal = spec.config("p'", &["a"], &["bot"]).unwrap();
        let t = find_trace(&spec, &start, |c| *c == goal, 10, 10, 1000)
            .unwrap()
            .unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(run_trace(&spec, &start, &t).unwrap(), goal);
    }
}
