use std::collections::BTreeSet;

use proptest::prelude::*;
use upds_core::fsa::{Component, ConfigAutomaton, Nfa};
use upds_core::kphase::{upds_to_mpds, MpdsConfig};
use upds_core::oracle::{oracle_runs, replay};
use upds_core::pds::{pds_post_star, LowerAutomaton};
use upds_core::upperapprox::{overapprox_post, overapprox_post_with, TraceAbstraction};
use upds_core::{count_phases, run_trace, step, upsilon, Action, Configuration, Rule, State, Symbol, UpdsSpec};

type RawRule = (usize, usize, usize, u8, usize, usize);

fn build_spec(n_states: usize, n_syms: usize, raw: &[RawRule]) -> UpdsSpec {
    let states: Vec<String> = (0..n_states).map(|i| format!("p{i}")).collect();
    let syms: Vec<String> = (0..n_syms).map(|i| format!("s{i}")).collect();
    let mut spec = UpdsSpec::new(&states, &syms).unwrap();
    for &(f, r, t, kind, b, c) in raw {
        let action = match kind % 3 {
            0 => Action::Pop,
            1 => Action::Switch(Symbol(b % n_syms)),
            _ => Action::Push(Symbol(b % n_syms), Symbol(c % n_syms)),
        };
        let rule = Rule {
            from: State(f % n_states),
            read: Symbol(r % n_syms),
            to: State(t % n_states),
            action,
        };
        if !spec.rules().contains(&rule) {
            spec.add_rule(rule).unwrap();
        }
    }
    spec
}

fn spec_and_config() -> impl Strategy<Value = (UpdsSpec, Configuration)> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(ns, ny)| {
            (
                Just(ns),
                Just(ny),
                prop::collection::vec((0..ns, 0..ny, 0..ns, 0u8..3, 0..ny, 0..ny), 0..=6),
                0..ns,
                prop::collection::vec(0..ny, 0..=2),
                prop::collection::vec(0..ny, 1..=3),
            )
        })
        .prop_map(|(ns, ny, raw, p, up, low)| {
            let spec = build_spec(ns, ny, &raw);
            let c = Configuration::new(
                State(p),
                up.into_iter().map(Symbol).collect(),
                low.into_iter().map(Symbol).collect(),
            );
            (spec, c)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upsilon_of_a_real_trace_is_the_upper_stack((spec, c) in spec_and_config()) {
        for run in oracle_runs(&spec, [&c], 5, 12) {
            prop_assert_eq!(upsilon(&spec, &run.trace, &c), run.end.upper.clone());
            prop_assert_eq!(run_trace(&spec, &c, &run.trace).unwrap(), run.end.clone());
        }
    }

    #[test]
    fn successors_replay((spec, c) in spec_and_config()) {
        for (id, d) in step(&spec, &c).unwrap() {
            prop_assert_eq!(replay(&spec, &c, &[id]), Some(d));
        }
    }

    #[test]
    fn phases_bounded_by_length((spec, c) in spec_and_config()) {
        for run in oracle_runs(&spec, [&c], 4, 12) {
            prop_assert!(count_phases(&spec, &run.trace) <= run.trace.len());
        }
    }

    #[test]
    fn mpds_encoding_round_trips((spec, c) in spec_and_config()) {
        let m = upds_to_mpds(&spec).unwrap();
        let enc = MpdsConfig::from_config(&c);
        prop_assert_eq!(enc.to_config(), Some(c.clone()));
        let mut from_mpds: BTreeSet<Configuration> = BTreeSet::new();
        let mut frontier = vec![enc];
        for _ in 0..4 {
            let mut next = Vec::new();
            for e in &frontier {
                for d in m.step(e) {
                    if let Some(cfg) = d.to_config() {
                        from_mpds.insert(cfg);
                    }
                    next.push(d);
                }
            }
            frontier = next;
        }
        for (_, d) in step(&spec, &c).unwrap() {
            prop_assert!(from_mpds.contains(&d));
        }
    }

    #[test]
    fn post_star_contains_initial_and_is_closed((spec, c) in spec_and_config()) {
        let init = LowerAutomaton::from_configs(&spec, [&(c.state, c.lower.clone())]);
        let post = pds_post_star(&spec, &init);
        prop_assert!(post.accepts(c.state, &c.lower));
        for (p, w) in post.configs_up_to(4) {
            for id in spec.rules_from(p, match w.first() { Some(s) => *s, None => continue }) {
                let r = spec.rule(id);
                let mut next = r.action.written();
                next.extend_from_slice(&w[1..]);
                prop_assert!(post.accepts(r.to, &next));
            }
        }
    }

    #[test]
    fn refined_abstraction_is_tighter((spec, c) in spec_and_config()) {
        let ca = ConfigAutomaton::from_config_set(&spec, [&c]).unwrap();
        let coarse = overapprox_post(&spec, &ca).unwrap();
        let fine = overapprox_post_with(&spec, &ca, TraceAbstraction::TopOfStack).unwrap();
        for d in fine.configs_up_to(5) {
            prop_assert!(coarse.accepts(&d));
        }
        for run in oracle_runs(&spec, [&c], 5, 10) {
            prop_assert!(fine.accepts(&run.end));
        }
    }

    #[test]
    fn nfa_boolean_operations(a in prop::collection::vec(0u8..3, 0..4), b in prop::collection::vec(0u8..3, 0..4)) {
        let na = Nfa::word(&a);
        let nb = Nfa::word(&b);
        prop_assert!(na.union(&nb).accepts(&a) && na.union(&nb).accepts(&b));
        prop_assert_eq!(na.intersect(&nb).is_empty(), a != b);
        prop_assert_eq!(na.remove_epsilons().trim().words_up_to(4), [a.clone()].into());
    }

    #[test]
    fn component_concat_pairs(u in prop::collection::vec(0usize..3, 0..3), l in prop::collection::vec(0usize..3, 0..3)) {
        let u: Vec<Symbol> = u.into_iter().map(Symbol).collect();
        let l: Vec<Symbol> = l.into_iter().map(Symbol).collect();
        let comp = Component::concat(&Nfa::word(&u), &Nfa::word(&l));
        prop_assert!(comp.accepts(&u, &l));
        prop_assert_eq!(comp.normalized().pairs_up_to(6), [(u.clone(), l.clone())].into());
    }
}
