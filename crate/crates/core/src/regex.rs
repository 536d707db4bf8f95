//! Regular expressions whose letters are classes of stack symbols.
//!
//! Concrete syntax: `[0_0 1_0]` is a class literal, `O_2` is `{0_2, 1_2}`,
//! `O_<=2` is every level-tagged symbol of level at most 2. Juxtaposition
//! concatenates, `|` is union, postfix `*` is Kleene star, parentheses group.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::lts::StackSymbol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassRegex {
    Class(BTreeSet<StackSymbol>),
    Concat(Box<ClassRegex>, Box<ClassRegex>),
    Union(Box<ClassRegex>, Box<ClassRegex>),
    Star(Box<ClassRegex>),
}

impl ClassRegex {
    pub fn class(symbols: impl IntoIterator<Item = StackSymbol>) -> Self {
        Self::Class(symbols.into_iter().collect())
    }

    /// `{0_level, 1_level}`.
    pub fn omega(level: u32) -> Self {
        Self::class([
            StackSymbol::omega(false, level),
            StackSymbol::omega(true, level),
        ])
    }

    /// All level-tagged symbols of level `0..=level`.
    pub fn omega_upto(level: u32) -> Self {
        Self::class(
            (0..=level).flat_map(|l| [StackSymbol::omega(false, l), StackSymbol::omega(true, l)]),
        )
    }

    pub fn concat(self, other: Self) -> Self {
        Self::Concat(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: Self) -> Self {
        Self::Union(Box::new(self), Box::new(other))
    }

    pub fn star(self) -> Self {
        Self::Star(Box::new(self))
    }

    /// Concatenation of a nonempty sequence.
    pub fn seq(parts: impl IntoIterator<Item = Self>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("nonempty sequence");
        it.fold(first, Self::concat)
    }

    /// Every symbol mentioned by a class literal.
    pub fn symbols(&self) -> BTreeSet<StackSymbol> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<StackSymbol>) {
        match self {
            Self::Class(c) => out.extend(c.iter().cloned()),
            Self::Concat(a, b) | Self::Union(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Self::Star(a) => a.collect(out),
        }
    }

    pub(crate) fn check_classes(&self) -> Result<()> {
        match self {
            Self::Class(c) if c.is_empty() => Err(Error::EmptyClass),
            Self::Class(_) => Ok(()),
            Self::Concat(a, b) | Self::Union(a, b) => {
                a.check_classes()?;
                b.check_classes()
            }
            Self::Star(a) => a.check_classes(),
        }
    }

    /// Direct membership test by tracking reachable end positions.
    pub fn matches(&self, word: &[StackSymbol]) -> bool {
        self.ends(word, 0).contains(&word.len())
    }

    fn ends(&self, word: &[StackSymbol], start: usize) -> BTreeSet<usize> {
        match self {
            Self::Class(c) => word
                .get(start)
                .filter(|s| c.contains(*s))
                .map(|_| start + 1)
                .into_iter()
                .collect(),
            Self::Concat(a, b) => a
                .ends(word, start)
                .into_iter()
                .flat_map(|m| b.ends(word, m))
                .collect(),
            Self::Union(a, b) => {
                let mut e = a.ends(word, start);
                e.extend(b.ends(word, start));
                e
            }
            Self::Star(a) => {
                let mut seen: BTreeSet<usize> = [start].into_iter().collect();
                let mut todo = vec![start];
                while let Some(p) = todo.pop() {
                    for q in a.ends(word, p) {
                        if seen.insert(q) {
                            todo.push(q);
                        }
                    }
                }
                seen
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            chars: text.char_indices().collect(),
            pos: 0,
        };
        let r = p.union()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.err("unexpected character"));
        }
        Ok(r)
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Parser {
    fn err(&self, message: &str) -> Error {
        let col = self.chars.get(self.pos).map_or_else(
            || self.chars.last().map_or(1, |c| c.0 + 2),
            |c| c.0 + 1,
        );
        Error::Parse {
            line: 1,
            col,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn union(&mut self) -> Result<ClassRegex> {
        let mut left = self.concat()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('|') {
                return Ok(left);
            }
            self.pos += 1;
            left = left.union(self.concat()?);
        }
    }

    fn concat(&mut self) -> Result<ClassRegex> {
        let mut parts = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None | Some('|') | Some(')') => break,
                _ => parts.push(self.postfix()?),
            }
        }
        if parts.is_empty() {
            return Err(self.err("expected an expression"));
        }
        Ok(ClassRegex::seq(parts))
    }

    fn postfix(&mut self) -> Result<ClassRegex> {
        let mut r = self.atom()?;
        loop {
            self.skip_ws();
            if self.peek() != Some('*') {
                return Ok(r);
            }
            self.pos += 1;
            r = r.star();
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || "()[]|*".contains(c) {
                break;
            }
            s.push(c);
            self.pos += 1;
        }
        s
    }

    fn atom(&mut self) -> Result<ClassRegex> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let r = self.union()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some('[') => {
                self.pos += 1;
                let mut set = BTreeSet::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(']') => break,
                        None => return Err(self.err("unterminated class")),
                        _ => {
                            let w = self.word();
                            if w.is_empty() {
                                return Err(self.err("unexpected character in class"));
                            }
                            set.insert(StackSymbol::new(w)?);
                        }
                    }
                }
                self.pos += 1;
                if set.is_empty() {
                    return Err(Error::EmptyClass);
                }
                Ok(ClassRegex::Class(set))
            }
            _ => {
                let start = self.pos;
                let w = self.word();
                let level = |digits: &str| digits.parse::<u32>().ok();
                if let Some(l) = w.strip_prefix("O_<=").and_then(level) {
                    Ok(ClassRegex::omega_upto(l))
                } else if let Some(l) = w.strip_prefix("O_").and_then(level) {
                    Ok(ClassRegex::omega(l))
                } else {
                    self.pos = start;
                    Err(self.err("expected `(`, `[`, `O_<l>` or `O_<=<l>`"))
                }
            }
        }
    }
}

fn class_text(c: &BTreeSet<StackSymbol>) -> String {
    let mut levels: Vec<u32> = c.iter().filter_map(StackSymbol::level).collect();
    levels.sort_unstable();
    levels.dedup();
    if c.len() == 2 && levels.len() == 1 && c.iter().all(|s| s.level().is_some()) {
        return format!("O_{}", levels[0]);
    }
    if let Some(&max) = levels.last() {
        if *c == ClassRegex::omega_upto(max).symbols() {
            return format!("O_<={max}");
        }
    }
    let names: Vec<&str> = c.iter().map(StackSymbol::name).collect();
    format!("[{}]", names.join(" "))
}

impl fmt::Display for ClassRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Class(c) => f.write_str(&class_text(c)),
            Self::Concat(a, b) => {
                if matches!(**a, Self::Union(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                if matches!(**b, Self::Union(..) | Self::Concat(..)) {
                    write!(f, " ({b})")
                } else {
                    write!(f, " {b}")
                }
            }
            Self::Union(a, b) => {
                if matches!(**b, Self::Union(..)) {
                    write!(f, "{a}|({b})")
                } else {
                    write!(f, "{a}|{b}")
                }
            }
            Self::Star(a) => {
                if matches!(**a, Self::Class(_)) {
                    write!(f, "{a}*")
                } else {
                    write!(f, "({a})*")
                }
            }
        }
    }
}
