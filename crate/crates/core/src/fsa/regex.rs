//! Boundary-marker regular expressions.
//!
//! Tokens are whitespace-separated symbol names plus the operators
//! `|`, `*`, `(`, `)`, `_` (empty word) and `^`. Every top-level
//! alternative contains exactly one `^`: what precedes it describes the
//! upper stack, what follows describes the lower stack.

use super::config::Component;
use super::nfa::Nfa;
use crate::error::{Error, Result};
use crate::system::Symbol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Bar,
    Star,
    LParen,
    RParen,
    Empty,
    Boundary,
}

/// Splits `src` into tokens, each tagged with its byte offset.
pub fn tokenize(src: &str) -> Vec<(usize, Token)> {
    let mut out = Vec::new();
    let mut ident_start: Option<usize> = None;
    let flush = |start: &mut Option<usize>, end: usize, out: &mut Vec<(usize, Token)>| {
        if let Some(s) = start.take() {
            out.push((s, Token::Ident(src[s..end].to_string())));
        }
    };
    for (i, ch) in src.char_indices() {
        let op = match ch {
            '|' => Some(Token::Bar),
            '*' => Some(Token::Star),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            '^' => Some(Token::Boundary),
            _ => None,
        };
        if let Some(tok) = op {
            flush(&mut ident_start, i, &mut out);
            out.push((i, tok));
        } else if ch.is_whitespace() {
            flush(&mut ident_start, i, &mut out);
        } else if ident_start.is_none() {
            ident_start = Some(i);
        }
    }
    flush(&mut ident_start, src.len(), &mut out);
    for (_, tok) in out.iter_mut() {
        if *tok == Token::Ident("_".into()) {
            *tok = Token::Empty;
        }
    }
    out
}

/// Regular expression over symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Empty,
    Sym(Symbol),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    /// Thompson-style construction.
    pub fn to_nfa(&self) -> Nfa<Symbol> {
        let mut nfa = Nfa::new();
        let (i, f) = self.build(&mut nfa);
        nfa.set_initial(i);
        nfa.set_final(f);
        nfa
    }

    fn build(&self, nfa: &mut Nfa<Symbol>) -> (usize, usize) {
        match self {
            Regex::Empty => {
                let q = nfa.add_state();
                (q, q)
            }
            Regex::Sym(s) => {
                let i = nfa.add_state();
                let f = nfa.add_state();
                nfa.add_edge(i, Some(*s), f);
                (i, f)
            }
            Regex::Concat(parts) => {
                let mut ends: Option<(usize, usize)> = None;
                for part in parts {
                    let (i, f) = part.build(nfa);
                    ends = Some(match ends {
                        None => (i, f),
                        Some((start, prev)) => {
                            nfa.add_edge(prev, None, i);
                            (start, f)
                        }
                    });
                }
                ends.unwrap_or_else(|| Regex::Empty.build(nfa))
            }
            Regex::Alt(parts) => {
                let i = nfa.add_state();
                let f = nfa.add_state();
                for part in parts {
                    let (pi, pf) = part.build(nfa);
                    nfa.add_edge(i, None, pi);
                    nfa.add_edge(pf, None, f);
                }
                (i, f)
            }
            Regex::Star(inner) => {
                let hub = nfa.add_state();
                let (i, f) = inner.build(nfa);
                nfa.add_edge(hub, None, i);
                nfa.add_edge(f, None, hub);
                (hub, hub)
            }
        }
    }
}

/// One top-level alternative: `upper ^ lower`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryAlt {
    pub upper: Regex,
    pub lower: Regex,
}

struct Parser<'a, F> {
    toks: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    resolve: &'a F,
}

impl<'a, F: Fn(&str) -> Option<Symbol>> Parser<'a, F> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn alternatives(&mut self) -> Result<Vec<BoundaryAlt>> {
        let mut alts = vec![self.boundary_alt()?];
        while self.peek() == Some(&Token::Bar) {
            self.pos += 1;
            alts.push(self.boundary_alt()?);
        }
        if self.pos < self.toks.len() {
            return self.err("unexpected token");
        }
        Ok(alts)
    }

    fn boundary_alt(&mut self) -> Result<BoundaryAlt> {
        let upper = self.sequence()?;
        if self.peek() != Some(&Token::Boundary) {
            return self.err("expected boundary marker `^`");
        }
        self.pos += 1;
        let lower = self.sequence()?;
        if self.peek() == Some(&Token::Boundary) {
            return self.err("more than one boundary marker `^` in one alternative");
        }
        Ok(BoundaryAlt { upper, lower })
    }

    /// A plain regex with alternation (used inside parentheses).
    fn inner(&mut self) -> Result<Regex> {
        let mut alts = vec![self.sequence()?];
        while self.peek() == Some(&Token::Bar) {
            self.pos += 1;
            alts.push(self.sequence()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Regex::Alt(alts)
        })
    }

    fn sequence(&mut self) -> Result<Regex> {
        let mut items = Vec::new();
        while let Some(tok) = self.peek() {
            match tok {
                Token::Ident(_) | Token::Empty | Token::LParen => items.push(self.starred()?),
                _ => break,
            }
        }
        Ok(match items.len() {
            0 => Regex::Empty,
            1 => items.pop().unwrap(),
            _ => Regex::Concat(items),
        })
    }

    fn starred(&mut self) -> Result<Regex> {
        let mut r = self.atom()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            r = Regex::Star(Box::new(r));
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Regex> {
        match self.peek().cloned() {
            Some(Token::Ident(name)) => match (self.resolve)(&name) {
                Some(s) => {
                    self.pos += 1;
                    Ok(Regex::Sym(s))
                }
                None => self.err(format!("undeclared symbol `{name}`")),
            },
            Some(Token::Empty) => {
                self.pos += 1;
                Ok(Regex::Empty)
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let r = self.inner()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(r)
                    }
                    Some(Token::Boundary) => {
                        self.err("boundary marker `^` is only allowed at top level")
                    }
                    _ => self.err("expected `)`"),
                }
            }
            _ => self.err("expected a symbol, `_` or `(`"),
        }
    }
}

/// Parses a boundary-marker expression into its alternatives.
pub fn parse_boundary(
    src: &str,
    resolve: &impl Fn(&str) -> Option<Symbol>,
) -> Result<Vec<BoundaryAlt>> {
    let mut parser = Parser {
        toks: tokenize(src),
        pos: 0,
        end: src.len(),
        resolve,
    };
    parser.alternatives()
}

/// Parses a plain expression (no `^`), e.g. a lower-stack language.
pub fn parse_plain(src: &str, resolve: &impl Fn(&str) -> Option<Symbol>) -> Result<Regex> {
    let mut parser = Parser {
        toks: tokenize(src),
        pos: 0,
        end: src.len(),
        resolve,
    };
    let r = parser.inner()?;
    if parser.pos < parser.toks.len() {
        return parser.err("unexpected token");
    }
    Ok(r)
}

/// Compiles a boundary-marker expression into one configuration-set slice.
pub fn compile_regex(
    src: &str,
    resolve: &impl Fn(&str) -> Option<Symbol>,
) -> Result<Component> {
    let alts = parse_boundary(src, resolve)?;
    let mut out: Option<Component> = None;
    for alt in alts {
        let c = Component::concat(&alt.upper.to_nfa(), &alt.lower.to_nfa());
        out = Some(match out {
            None => c,
            Some(prev) => prev.union(&c),
        });
    }
    Ok(out.expect("at least one alternative").normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::e1;
    use std::collections::BTreeSet;

    fn resolver<'a>(names: &'a [&'a str]) -> impl Fn(&str) -> Option<Symbol> + 'a {
        move |n| names.iter().position(|m| *m == n).map(Symbol)
    }

    #[test]
    fn tokenizes_operators_without_spaces() {
        let toks: Vec<Token> = tokenize("a(b|c)*^_").into_iter().map(|(_, t)| t).collect();
        assert_eq!(
            toks,
            vec![
                Token::Ident("a".into()),
                Token::LParen,
                Token::Ident("b".into()),
                Token::Bar,
                Token::Ident("c".into()),
                Token::RParen,
                Token::Star,
                Token::Boundary,
                Token::Empty,
            ]
        );
    }

    #[test]
    fn c1_expression() {
        let spec = e1();
        let r = |n: &str| spec.symbol_id(n).ok();
        let comp = compile_regex("^ x (y x)* bot", &r).unwrap();
        let w = |ns: &[&str]| -> Vec<Symbol> { ns.iter().map(|n| spec.symbol_id(n).unwrap()).collect() };
        assert!(comp.accepts(&[], &w(&["x", "bot"])));
        assert!(comp.accepts(&[], &w(&["x", "y", "x", "y", "x", "bot"])));
        assert!(!comp.accepts(&[], &w(&["x", "y", "bot"])));
        assert!(!comp.accepts(&w(&["a"]), &w(&["x", "bot"])));
        assert!(comp.zone_sound());
    }

    #[test]
    fn empty_expression() {
        let names = ["a"];
        let comp = compile_regex("^ ", &resolver(&names)).unwrap();
        assert_eq!(comp.pairs_up_to(3), BTreeSet::from([(vec![], vec![])]));
        let comp = compile_regex("_ ^ _", &resolver(&names)).unwrap();
        assert_eq!(comp.pairs_up_to(3), BTreeSet::from([(vec![], vec![])]));
    }

    #[test]
    fn star_upper_and_fixed_lower() {
        let names = ["a", "c"];
        let comp = compile_regex("a* ^ c", &resolver(&names)).unwrap();
        // hand-built reference: upper a*, lower exactly c
        let mut reference = Nfa::new();
        let q0 = reference.add_state();
        let q1 = reference.add_state();
        reference.set_initial(q0);
        reference.set_final(q1);
        reference.add_edge(q0, Some(Symbol(0)), q0);
        reference.add_edge(q0, Some(Symbol(1)), q1);
        for w in crate::fsa::config::all_words_up_to(2, 5) {
            for split in 0..=w.len() {
                let (u, l) = w.split_at(split);
                let expected = u.iter().all(|&s| s == Symbol(0)) && reference.accepts(&w) && l == [Symbol(1)];
                assert_eq!(comp.accepts(u, l), expected, "{u:?} ^ {l:?}");
            }
        }
    }

    #[test]
    fn alternatives_each_need_a_boundary() {
        let names = ["a", "b"];
        let comp = compile_regex("a ^ b | ^ a a", &resolver(&names)).unwrap();
        assert!(comp.accepts(&[Symbol(0)], &[Symbol(1)]));
        assert!(comp.accepts(&[], &[Symbol(0), Symbol(0)]));
        assert!(!comp.accepts(&[Symbol(0)], &[Symbol(0), Symbol(0)]));

        let err = compile_regex("a ^ b | a", &resolver(&names)).unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 9, .. }), "{err:?}");
        let err = compile_regex("a ^ b ^ a", &resolver(&names)).unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 6, .. }), "{err:?}");
        let err = compile_regex("(a ^ b)", &resolver(&names)).unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 3, .. }), "{err:?}");
        let err = compile_regex("a b", &resolver(&names)).unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 3, .. }), "{err:?}");
        let err = compile_regex("^ z", &resolver(&names)).unwrap_err();
        assert!(matches!(err, Error::Parse { pos: 2, .. }), "{err:?}");
    }
}
