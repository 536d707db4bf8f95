//! Line-oriented text format for pushdown systems.
//!
//! ```text
//! # full-line comment
//! states .p p. q
//! stack s t
//! actions a b
//! internal .p a q
//! push q a p. s
//! pop p. s b q
//! ```
//!
//! Declarations may repeat and must precede their use.

use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::lts::{ActionLabel, ControlState, Pda, Rule, StackSymbol};

const WRAP: usize = 12;

struct Tokens<'a> {
    line: usize,
    items: Vec<(usize, &'a str)>,
}

fn tokenize(line_no: usize, line: &str) -> Tokens<'_> {
    let mut items = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                items.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        items.push((s, &line[s..]));
    }
    Tokens {
        line: line_no,
        items,
    }
}

impl Tokens<'_> {
    fn err(&self, idx: usize, message: impl Into<String>) -> Error {
        let col = self.items.get(idx).map_or(1, |t| t.0 + 1);
        Error::Parse {
            line: self.line,
            col,
            message: message.into(),
        }
    }

    fn at(&self, idx: usize) -> &str {
        self.items[idx].1
    }

    fn expect_len(&self, n: usize, form: &str) -> Result<()> {
        if self.items.len() != n {
            let idx = self.items.len().min(n);
            return Err(self.err(idx, format!("expected `{form}`")));
        }
        Ok(())
    }
}

struct Decls {
    states: IndexSet<ControlState>,
    stack: IndexSet<StackSymbol>,
    actions: IndexSet<ActionLabel>,
}

impl Decls {
    fn state(&self, t: &Tokens, i: usize) -> Result<ControlState> {
        let s = ControlState::parse(t.at(i)).map_err(|e| t.err(i, e.to_string()))?;
        if !self.states.contains(&s) {
            return Err(t.err(i, format!("undeclared state `{s}`")));
        }
        Ok(s)
    }

    fn symbol(&self, t: &Tokens, i: usize) -> Result<StackSymbol> {
        let s = StackSymbol::new(t.at(i)).map_err(|e| t.err(i, e.to_string()))?;
        if !self.stack.contains(&s) {
            return Err(t.err(i, format!("undeclared stack symbol `{s}`")));
        }
        Ok(s)
    }

    fn action(&self, t: &Tokens, i: usize) -> Result<ActionLabel> {
        let a = ActionLabel::new(t.at(i)).map_err(|e| t.err(i, e.to_string()))?;
        if !self.actions.contains(&a) {
            return Err(t.err(i, format!("undeclared action `{a}`")));
        }
        Ok(a)
    }
}

/// Parses the PDA text format.
pub fn parse_pda(text: &str) -> Result<Pda> {
    let mut decls = Decls {
        states: IndexSet::new(),
        stack: IndexSet::new(),
        actions: IndexSet::new(),
    };
    let mut rules = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let t = tokenize(n + 1, line);
        if t.items.is_empty() || t.at(0).starts_with('#') {
            continue;
        }
        match t.at(0) {
            "states" => {
                for i in 1..t.items.len() {
                    let s = ControlState::parse(t.at(i)).map_err(|e| t.err(i, e.to_string()))?;
                    decls.states.insert(s);
                }
            }
            "stack" => {
                for i in 1..t.items.len() {
                    let s = StackSymbol::new(t.at(i)).map_err(|e| t.err(i, e.to_string()))?;
                    decls.stack.insert(s);
                }
            }
            "actions" => {
                for i in 1..t.items.len() {
                    let a = ActionLabel::new(t.at(i)).map_err(|e| t.err(i, e.to_string()))?;
                    decls.actions.insert(a);
                }
            }
            "internal" => {
                t.expect_len(4, "internal <src> <action> <dst>")?;
                rules.push(Rule::internal(
                    decls.state(&t, 1)?,
                    decls.action(&t, 2)?,
                    decls.state(&t, 3)?,
                ));
            }
            "push" => {
                t.expect_len(5, "push <src> <action> <dst> <sym>")?;
                rules.push(Rule::push(
                    decls.state(&t, 1)?,
                    decls.action(&t, 2)?,
                    decls.state(&t, 3)?,
                    decls.symbol(&t, 4)?,
                ));
            }
            "pop" => {
                t.expect_len(5, "pop <src> <sym> <action> <dst>")?;
                rules.push(Rule::pop(
                    decls.state(&t, 1)?,
                    decls.symbol(&t, 2)?,
                    decls.action(&t, 3)?,
                    decls.state(&t, 4)?,
                ));
            }
            other => return Err(t.err(0, format!("unknown directive `{other}`"))),
        }
    }
    Pda::new(decls.states, decls.stack, decls.actions, rules)
}

fn write_decl<T: std::fmt::Display>(out: &mut String, keyword: &str, items: &IndexSet<T>) {
    let all: Vec<&T> = items.iter().collect();
    for chunk in all.chunks(WRAP) {
        out.push_str(keyword);
        for item in chunk {
            let _ = write!(out, " {item}");
        }
        out.push('\n');
    }
}

/// Renders a PDA; `parse_pda(&emit_pda(p))` reproduces `p` exactly.
pub fn emit_pda(pda: &Pda) -> String {
    let mut out = String::new();
    write_decl(&mut out, "states", pda.states());
    write_decl(&mut out, "stack", pda.stack_alphabet());
    write_decl(&mut out, "actions", pda.actions());
    for rule in pda.rules() {
        let _ = writeln!(out, "{rule}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two-state toggler
states .p p. q
stack s t
actions a b
internal .p a q
push q a p. s
   # indented comment
pop p. s b q
";

    #[test]
    fn parses_sample() {
        let pda = parse_pda(SAMPLE).unwrap();
        assert_eq!(pda.states().len(), 3);
        assert_eq!(pda.rules().len(), 3);
        assert_eq!(pda.size(), 2 + 2 + 3);
    }

    #[test]
    fn emit_is_byte_stable() {
        let pda = parse_pda(SAMPLE).unwrap();
        let once = emit_pda(&pda);
        let twice = emit_pda(&parse_pda(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn undeclared_symbol_has_position() {
        let text = "states p q\nactions a\npop p s a q\n";
        match parse_pda(text).unwrap_err() {
            Error::Parse { line, col, message } => {
                assert_eq!((line, col), (3, 7));
                assert!(message.contains("undeclared stack symbol"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn wrong_arity_and_unknown_directive() {
        assert!(matches!(
            parse_pda("states p\nactions a\ninternal p a\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_pda("jump p q\n"),
            Err(Error::Parse { line: 1, col: 1, .. })
        ));
    }

    #[test]
    fn long_declarations_wrap() {
        let names: Vec<String> = (0..30).map(|i| format!("q{i}")).collect();
        let text = format!("states {}\n", names.join(" "));
        let pda = parse_pda(&text).unwrap();
        let out = emit_pda(&pda);
        assert_eq!(out.lines().filter(|l| l.starts_with("states")).count(), 3);
        assert_eq!(parse_pda(&out).unwrap().states(), pda.states());
    }
}
