//! Finite automata: a generic ε-NFA and the two-track configuration
//! automata built on it.

pub mod config;
pub mod nfa;
pub mod regex;

pub use config::{all_configs_up_to, all_words_up_to, decode, encode, Component, ConfigAutomaton, Letter, Zone};
pub use nfa::{Label, Nfa};
pub use regex::{compile_regex, parse_boundary, parse_plain, BoundaryAlt, Regex};
