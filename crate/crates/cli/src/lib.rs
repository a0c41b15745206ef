//! Model files, safety checkers and DOT export for upper-stack pushdown
//! systems.

pub mod check;
pub mod dot;
pub mod model;

pub use check::{check_safety, check_stack_overflow, check_upper_read, CheckOptions, Report, Verdict};
pub use model::{parse_config, parse_model, ModelError, ModelFile, SetLine};
