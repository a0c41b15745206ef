//! The line-oriented model format.
//!
//! ```text
//! states p p'
//! alphabet a b x y bot
//! rule p x -> p a
//! set C1 p ^ x (y x)* bot
//! ```

use std::fmt;

use thiserror::Error;
use upds_core::fsa::{compile_regex, regex::tokenize, ConfigAutomaton};
use upds_core::{Action, Configuration, Rule, State, Symbol, UpdsSpec};

/// Names the checkers inject; models may not declare them.
pub const RESERVED_SYMBOLS: [&str; 2] = ["$top", "$fill"];

const OPERATOR_CHARS: [char; 5] = ['^', '|', '(', ')', '*'];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unknown set `{0}`")]
    UnknownSet(String),

    #[error(transparent)]
    Core(#[from] upds_core::Error),
}

pub type ModelResult<T> = Result<T, ModelError>;

/// One `set` line: the slice of set `name` at `state`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetLine {
    pub name: String,
    pub state: State,
    /// Token-normalized boundary expression.
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub spec: UpdsSpec,
    pub sets: Vec<SetLine>,
}

fn syntax<T>(line: usize, col: usize, msg: impl Into<String>) -> ModelResult<T> {
    Err(ModelError::Syntax {
        line,
        col,
        msg: msg.into(),
    })
}

fn check_ident(name: &str, line: usize, col: usize) -> ModelResult<()> {
    if name == "_" || name == "->" || name.contains(OPERATOR_CHARS) {
        return syntax(line, col, format!("`{name}` is reserved"));
    }
    if name.starts_with('$') {
        return syntax(line, col, format!("`{name}`: names starting with `$` are reserved"));
    }
    Ok(())
}

/// Whitespace-separated words with their 1-based columns.
fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn normalize_expr(src: &str) -> String {
    use upds_core::fsa::regex::Token;
    tokenize(src)
        .into_iter()
        .map(|(_, t)| match t {
            Token::Ident(s) => s,
            Token::Bar => "|".into(),
            Token::Star => "*".into(),
            Token::LParen => "(".into(),
            Token::RParen => ")".into(),
            Token::Empty => "_".into(),
            Token::Boundary => "^".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_model(text: &str) -> ModelResult<ModelFile> {
    let mut states: Option<Vec<String>> = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut spec: Option<UpdsSpec> = None;
    let mut sets = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let ws = words(content);
        let Some(&(col, kw)) = ws.first() else { continue };
        let ensure_spec = |spec: &mut Option<UpdsSpec>| -> ModelResult<()> {
            if spec.is_none() {
                let (Some(st), Some(al)) = (&states, &alphabet) else {
                    return syntax(line, col, "`states` and `alphabet` must come first");
                };
                *spec = Some(UpdsSpec::new(st, al)?);
            }
            Ok(())
        };
        match kw {
            "states" | "alphabet" => {
                if spec.is_some() {
                    return syntax(line, col, format!("`{kw}` after rules or sets"));
                }
                let slot = if kw == "states" { &mut states } else { &mut alphabet };
                if slot.is_some() {
                    return syntax(line, col, format!("duplicate `{kw}` line"));
                }
                let mut names: Vec<String> = Vec::new();
                for &(c, w) in &ws[1..] {
                    check_ident(w, line, c)?;
                    if names.iter().any(|n| n == w) {
                        return syntax(line, c, format!("`{w}` declared twice"));
                    }
                    names.push(w.to_string());
                }
                *slot = Some(names);
            }
            "rule" => {
                ensure_spec(&mut spec)?;
                let s = spec.as_mut().expect("built");
                if ws.len() < 5 || ws.len() > 7 || ws[3].1 != "->" {
                    return syntax(line, col, "expected `rule <p> <a> -> <p'> [<b> [<c>]]`");
                }
                let state = |i: usize| -> ModelResult<State> {
                    s.state_id(ws[i].1)
                        .or_else(|_| syntax(line, ws[i].0, format!("undeclared state `{}`", ws[i].1)))
                };
                let symbol = |i: usize| -> ModelResult<Symbol> {
                    s.symbol_id(ws[i].1)
                        .or_else(|_| syntax(line, ws[i].0, format!("undeclared symbol `{}`", ws[i].1)))
                };
                let from = state(1)?;
                let read = symbol(2)?;
                let to = state(4)?;
                let action = match ws.len() {
                    5 => Action::Pop,
                    6 => Action::Switch(symbol(5)?),
                    _ => Action::Push(symbol(5)?, symbol(6)?),
                };
                let rule = Rule {
                    from,
                    read,
                    to,
                    action,
                };
                if s.rules().contains(&rule) {
                    return syntax(line, col, "duplicate rule");
                }
                s.add_rule(rule)?;
            }
            "set" => {
                ensure_spec(&mut spec)?;
                let s = spec.as_ref().expect("built");
                if ws.len() < 4 {
                    return syntax(line, col, "expected `set <name> <state> <expr>`");
                }
                let (ncol, name) = ws[1];
                check_ident(name, line, ncol)?;
                let state = s
                    .state_id(ws[2].1)
                    .or_else(|_| syntax(line, ws[2].0, format!("undeclared state `{}`", ws[2].1)))?;
                let ecol = ws[3].0;
                let expr = &content[ecol - 1..];
                let resolve = |n: &str| s.symbol_id(n).ok();
                if let Err(e) = compile_regex(expr, &resolve) {
                    let at = match &e {
                        upds_core::Error::Parse { pos, .. } => ecol + pos,
                        _ => ecol,
                    };
                    return syntax(line, at, format!("bad expression: {e}"));
                }
                if sets.iter().any(|l: &SetLine| l.name == name && l.state == state) {
                    return syntax(line, col, format!("set `{name}` already has a slice for `{}`", ws[2].1));
                }
                sets.push(SetLine {
                    name: name.to_string(),
                    state,
                    expr: normalize_expr(expr),
                });
            }
            other => return syntax(line, col, format!("unknown keyword `{other}`")),
        }
    }
    let spec = match spec {
        Some(s) => s,
        None => UpdsSpec::new(&states.unwrap_or_default(), &alphabet.unwrap_or_default())?,
    };
    Ok(ModelFile { spec, sets })
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.spec.states().join(" "))?;
        writeln!(f, "alphabet {}", self.spec.symbols().join(" "))?;
        for r in self.spec.rules() {
            write!(
                f,
                "rule {} {} -> {}",
                self.spec.state_name(r.from),
                self.spec.symbol_name(r.read),
                self.spec.state_name(r.to)
            )?;
            for s in r.action.written() {
                write!(f, " {}", self.spec.symbol_name(s))?;
            }
            writeln!(f)?;
        }
        for l in &self.sets {
            writeln!(f, "set {} {} {}", l.name, self.spec.state_name(l.state), l.expr)?;
        }
        Ok(())
    }
}

impl ModelFile {
    pub fn set_names(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for l in &self.sets {
            if !out.contains(&l.name.as_str()) {
                out.push(&l.name);
            }
        }
        out
    }

    /// The configuration automaton of set `name` over `spec`, which must
    /// extend this model's alphabet.
    pub fn config_set_in(&self, spec: &UpdsSpec, name: &str) -> ModelResult<ConfigAutomaton> {
        if !self.sets.iter().any(|l| l.name == name) {
            return Err(ModelError::UnknownSet(name.to_string()));
        }
        let resolve = |n: &str| spec.symbol_id(n).ok();
        let mut out = ConfigAutomaton::empty(spec);
        for l in self.sets.iter().filter(|l| l.name == name) {
            out.add_to_component(l.state, &compile_regex(&l.expr, &resolve)?);
        }
        Ok(out.normalized())
    }

    pub fn config_set(&self, name: &str) -> ModelResult<ConfigAutomaton> {
        self.config_set_in(&self.spec, name)
    }

    /// Parses `state: upper ^ lower`.
    pub fn parse_config(&self, text: &str) -> ModelResult<Configuration> {
        parse_config(&self.spec, text)
    }
}

pub fn parse_config(spec: &UpdsSpec, text: &str) -> ModelResult<Configuration> {
    let bad = |msg: String| ModelError::Syntax { line: 1, col: 1, msg };
    let (state, rest) = text
        .split_once(':')
        .ok_or_else(|| bad("expected `state: upper ^ lower`".into()))?;
    let (upper, lower) = rest
        .split_once('^')
        .ok_or_else(|| bad("missing `^` between upper and lower stack".into()))?;
    let state = spec
        .state_id(state.trim())
        .map_err(|_| bad(format!("undeclared state `{}`", state.trim())))?;
    let syms = |part: &str| -> ModelResult<Vec<Symbol>> {
        part.split_whitespace()
            .map(|n| spec.symbol_id(n).map_err(|_| bad(format!("undeclared symbol `{n}`"))))
            .collect()
    };
    Ok(Configuration {
        state,
        upper: syms(upper)?,
        lower: syms(lower)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: &str = include_str!("../../../fixtures/e1.upds");

    #[test]
    fn e1_source() {
        let m = parse_model(E1).unwrap();
        assert_eq!(m.spec.num_states(), 2);
        assert_eq!(m.spec.rules().len(), 6);
        assert_eq!(m.set_names(), vec!["C1"]);
    }

    #[test]
    fn empty_rule_section() {
        let m = parse_model("states p\nalphabet a\n").unwrap();
        assert!(m.spec.rules().is_empty());
    }

    #[test]
    fn undeclared_symbol_reports_line() {
        let err = parse_model("states p\nalphabet a\nrule p z -> p a\n").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { line: 3, col: 8, .. }), "{err}");
    }

    #[test]
    fn duplicate_rule() {
        let err = parse_model("states p\nalphabet a\nrule p a -> p\nrule p a -> p\n").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { line: 4, .. }));
    }

    #[test]
    fn bad_regex() {
        let err = parse_model("states p\nalphabet a\nset C p a ( a\n").unwrap_err();
        assert!(matches!(err, ModelError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn reserved_names() {
        assert!(parse_model("states p\nalphabet $top\n").is_err());
        assert!(parse_model("states p\nalphabet a*\n").is_err());
    }

    #[test]
    fn round_trip() {
        let m = parse_model(E1).unwrap();
        let again = parse_model(&m.to_string()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn config_syntax() {
        let m = parse_model(E1).unwrap();
        let c = m.parse_config("p': a ^ bot").unwrap();
        assert_eq!(m.spec.config_display(&c), "p': a ^ bot");
        let c = m.parse_config("p: ^").unwrap();
        assert!(c.upper.is_empty() && c.lower.is_empty());
        assert!(m.parse_config("p a ^ bot").is_err());
    }
}
