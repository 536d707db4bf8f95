//! Text format for macro rules.
//!
//! ```text
//! stack 0_0 1_0 0_1 1_1
//! chain .p 0_0 -> q. : a b c
//! pairpush s -> t : 0_0 1_0
//! def s : t 0_0 | u
//! att s : t | u 1_0
//! guarded .p -> q. : O_0* O_1
//!   states: c
//!   init: c
//!   in: 0_0 1_0 0_1 1_1
//!   out: a
//!   c 0_0 -> c a
//!   c 1_0 -> c a
//!   c 0_1 -> c a
//!   c 1_1 -> c a
//! end
//! ```
//!
//! Pushed words are listed top first. Every stack symbol must be declared
//! by a `stack` line before use.

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::lts::{ActionLabel, ControlState, Pda, StackSymbol};
use crate::macros::{expand_all, ChoiceOption, MacroRule, StatePair};
use crate::regex::ClassRegex;
use crate::transducer::Transducer;

/// A parsed macro file.
#[derive(Debug, Clone)]
pub struct MacroFile {
    pub alphabet: IndexSet<StackSymbol>,
    pub macros: Vec<MacroRule>,
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn err(&self, tok: &str, message: impl Into<String>) -> Error {
        let col = (tok.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize) + 1;
        Error::Parse {
            line: self.no,
            col: col.min(self.text.len() + 1),
            message: message.into(),
        }
    }

    /// Splits `head : tail` around the first `:`.
    fn halves(&self) -> Result<(&'a str, &'a str)> {
        self.text
            .split_once(':')
            .ok_or_else(|| self.err(self.text, "expected `:`"))
    }
}

fn state(l: &Line, tok: &str) -> Result<ControlState> {
    ControlState::parse(tok).map_err(|e| l.err(tok, e.to_string()))
}

fn pair(l: &Line, tok: &str) -> Result<StatePair> {
    StatePair::new(tok).map_err(|e| l.err(tok, e.to_string()))
}

fn symbols(l: &Line, alphabet: &IndexSet<StackSymbol>, toks: &[&str]) -> Result<Vec<StackSymbol>> {
    toks.iter()
        .map(|t| {
            let s = StackSymbol::new(*t).map_err(|e| l.err(t, e.to_string()))?;
            if !alphabet.contains(&s) {
                return Err(l.err(t, format!("undeclared stack symbol `{s}`")));
            }
            Ok(s)
        })
        .collect()
}

/// `<src> -> <dst>` with one token on each side.
fn arrow<'a>(l: &Line, head: &'a str, form: &str) -> Result<(&'a str, &'a str)> {
    match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        [_, src, "->", dst] => Ok((src, dst)),
        _ => Err(l.err(head, format!("expected `{form}`"))),
    }
}

fn options(l: &Line, alphabet: &IndexSet<StackSymbol>, tail: &str) -> Result<Vec<ChoiceOption>> {
    tail.split('|')
        .map(|opt| {
            let toks: Vec<&str> = opt.split_whitespace().collect();
            let (first, rest) = toks
                .split_first()
                .ok_or_else(|| l.err(opt, "empty option"))?;
            Ok((pair(l, first)?, symbols(l, alphabet, rest)?))
        })
        .collect()
}

/// Parses a macro file.
pub fn parse_macros(text: &str) -> Result<MacroFile> {
    let mut alphabet = IndexSet::new();
    let mut macros = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, t)| Line { no: i + 1, text: t });
    while let Some(l) = lines.next() {
        let trimmed = l.text.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let keyword = trimmed.split_whitespace().next().expect("nonempty");
        match keyword {
            "stack" => {
                for t in trimmed.split_whitespace().skip(1) {
                    alphabet.insert(StackSymbol::new(t).map_err(|e| l.err(t, e.to_string()))?);
                }
            }
            "chain" => {
                let (head, tail) = l.halves()?;
                let toks: Vec<&str> = head.split_whitespace().collect();
                let [_, src, sym, "->", dst] = toks.as_slice() else {
                    return Err(l.err(head, "expected `chain <src> <sym> -> <dst> : <actions>`"));
                };
                let actions = tail
                    .split_whitespace()
                    .map(|a| ActionLabel::new(a).map_err(|e| l.err(a, e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if actions.is_empty() {
                    return Err(l.err(tail, "chain needs at least one action"));
                }
                macros.push(MacroRule::Chain {
                    src: state(&l, src)?,
                    popped: symbols(&l, &alphabet, &[sym])?.remove(0),
                    actions,
                    dst: state(&l, dst)?,
                });
            }
            "pairpush" => {
                let (head, tail) = l.halves()?;
                let (src, dst) = arrow(&l, head, "pairpush <pair> -> <pair> : <symbols>")?;
                let toks: Vec<&str> = tail.split_whitespace().collect();
                macros.push(MacroRule::PairPush {
                    src: pair(&l, src)?,
                    dst: pair(&l, dst)?,
                    pushed: symbols(&l, &alphabet, &toks)?,
                });
            }
            "def" | "att" => {
                let (head, tail) = l.halves()?;
                let toks: Vec<&str> = head.split_whitespace().collect();
                let [_, src] = toks.as_slice() else {
                    return Err(l.err(head, format!("expected `{keyword} <pair> : <options>`")));
                };
                let src = pair(&l, src)?;
                let options = options(&l, &alphabet, tail)?;
                macros.push(if keyword == "def" {
                    MacroRule::DefChoice { src, options }
                } else {
                    MacroRule::AttChoice { src, options }
                });
            }
            "guarded" => {
                let (head, tail) = l.halves()?;
                let (src, dst) = arrow(&l, head, "guarded <src> -> <dst> : <regex>")?;
                let guard = ClassRegex::parse(tail).map_err(|e| l.err(tail, e.to_string()))?;
                let mut body = String::new();
                let mut closed = false;
                let start = l.no;
                for b in lines.by_ref() {
                    if b.text.trim() == "end" {
                        closed = true;
                        break;
                    }
                    body.push_str(b.text);
                    body.push('\n');
                }
                if !closed {
                    return Err(l.err(l.text, "`guarded` block has no `end`"));
                }
                let trans = Transducer::parse(&body).map_err(|e| match e {
                    Error::Parse { line, col, message } => Error::Parse {
                        line: line + start,
                        col,
                        message,
                    },
                    other => l.err(l.text, other.to_string()),
                })?;
                macros.push(MacroRule::GuardedPop {
                    src: state(&l, src)?,
                    guard,
                    trans,
                    dst: state(&l, dst)?,
                });
            }
            other => return Err(l.err(keyword, format!("unknown directive `{other}`"))),
        }
    }
    Ok(MacroFile { alphabet, macros })
}

/// Parses and expands a macro file into a PDA.
pub fn expand_macros(text: &str) -> Result<Pda> {
    let file = parse_macros(text)?;
    Ok(expand_all(&file.macros, &file.alphabet, &[])?.0)
}
