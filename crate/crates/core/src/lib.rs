//! Reachability analysis for pushdown systems with an upper stack.

pub mod csgrammar;
pub mod error;
pub mod fixtures;
pub mod fsa;
pub mod kphase;
pub mod oracle;
pub mod pds;
pub mod system;
pub mod upperapprox;

pub use error::{Error, Result};
pub use system::{
    apply, count_phases, run_trace, step, upsilon, Action, Configuration, PhaseCount, Rule,
    RuleId, RuleKind, State, Symbol, Trace, UpdsSpec,
};
