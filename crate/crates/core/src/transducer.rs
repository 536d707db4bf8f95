//! Real-time, non-erasing, deterministic finite-state transducers.
//!
//! Text format:
//!
//! ```text
//! states: q0 q1
//! init: q0
//! in: 0 1
//! out: x y
//! q0 0 -> q1 x y
//! q0 1 -> q0 y
//! q1 0 -> q1 x
//! q1 1 -> q0 x
//! ```
//!
//! Header keywords may repeat; their lists accumulate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexSet;

use crate::error::{Error, Result};

/// A transducer with total transition function `delta[state][input]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transducer {
    states: IndexSet<String>,
    initial: usize,
    inputs: IndexSet<String>,
    outputs: IndexSet<String>,
    delta: Vec<Vec<(usize, Vec<usize>)>>,
}

/// One table entry: `(state, input, next state, output word)`.
pub type Entry<'a> = (&'a str, &'a str, &'a str, Vec<&'a str>);

fn token_ok(s: &str) -> bool {
    !s.is_empty() && !s.contains(char::is_whitespace) && s != "->"
}

impl Transducer {
    /// Builds a transducer; every `(state, input)` pair needs exactly one entry
    /// with a nonempty output word.
    pub fn new<'a>(
        states: &[&str],
        initial: &str,
        inputs: &[&str],
        outputs: &[&str],
        entries: impl IntoIterator<Item = Entry<'a>>,
    ) -> Result<Self> {
        let to_set = |xs: &[&str]| -> Result<IndexSet<String>> {
            xs.iter()
                .map(|x| {
                    if token_ok(x) {
                        Ok(x.to_string())
                    } else {
                        Err(Error::InvalidName(x.to_string()))
                    }
                })
                .collect()
        };
        let states = to_set(states)?;
        let inputs = to_set(inputs)?;
        let outputs = to_set(outputs)?;
        let initial = states
            .get_index_of(initial)
            .ok_or_else(|| Error::UnknownState(initial.to_string()))?;
        let mut table: Vec<Vec<Option<(usize, Vec<usize>)>>> =
            vec![vec![None; inputs.len()]; states.len()];
        for (q, a, r, w) in entries {
            let qi = states
                .get_index_of(q)
                .ok_or_else(|| Error::UnknownState(q.to_string()))?;
            let ri = states
                .get_index_of(r)
                .ok_or_else(|| Error::UnknownState(r.to_string()))?;
            let ai = inputs
                .get_index_of(a)
                .ok_or_else(|| Error::UnknownSymbol(a.to_string()))?;
            if w.is_empty() {
                return Err(Error::EmptyOutput {
                    state: q.to_string(),
                    symbol: a.to_string(),
                });
            }
            let word = w
                .iter()
                .map(|o| {
                    outputs
                        .get_index_of(*o)
                        .ok_or_else(|| Error::UnknownSymbol(o.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            if table[qi][ai].is_some() {
                return Err(Error::Nondeterministic(format!(
                    "two transitions from `{q}` on `{a}`"
                )));
            }
            table[qi][ai] = Some((ri, word));
        }
        let mut delta = Vec::with_capacity(states.len());
        for (qi, row) in table.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (ai, cell) in row.into_iter().enumerate() {
                out.push(cell.ok_or_else(|| Error::MissingTransition {
                    state: states[qi].clone(),
                    symbol: inputs[ai].clone(),
                })?);
            }
            delta.push(out);
        }
        Ok(Self {
            states,
            initial,
            inputs,
            outputs,
            delta,
        })
    }

    pub fn states(&self) -> &IndexSet<String> {
        &self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn inputs(&self) -> &IndexSet<String> {
        &self.inputs
    }

    pub fn outputs(&self) -> &IndexSet<String> {
        &self.outputs
    }

    /// `(next state, output word)` for a state and input index.
    pub fn transition(&self, q: usize, a: usize) -> (usize, &[usize]) {
        let (r, w) = &self.delta[q][a];
        (*r, w)
    }

    /// `|Q| + |Σ| + |Υ| + Σ |δ-outputs|`.
    pub fn size(&self) -> usize {
        self.states.len()
            + self.inputs.len()
            + self.outputs.len()
            + self
                .delta
                .iter()
                .flatten()
                .map(|(_, w)| w.len())
                .sum::<usize>()
    }

    pub fn is_letter_to_letter(&self) -> bool {
        self.delta.iter().flatten().all(|(_, w)| w.len() == 1)
    }

    /// Runs on input indices, returning output indices.
    pub fn run_indices(&self, word: &[usize]) -> Vec<usize> {
        let mut q = self.initial;
        let mut out = Vec::with_capacity(word.len());
        for &a in word {
            let (r, w) = &self.delta[q][a];
            out.extend_from_slice(w);
            q = *r;
        }
        out
    }

    pub fn run<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<String>> {
        let idx = word
            .iter()
            .map(|a| {
                self.inputs
                    .get_index_of(a.as_ref())
                    .ok_or_else(|| Error::UnknownSymbol(a.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .run_indices(&idx)
            .into_iter()
            .map(|o| self.outputs[o].clone())
            .collect())
    }

    /// Renames input symbols; unmapped symbols keep their name.
    pub fn relabel_inputs(&self, map: &BTreeMap<String, String>) -> Result<Self> {
        let inputs: IndexSet<String> = self
            .inputs
            .iter()
            .map(|a| map.get(a).unwrap_or(a).clone())
            .collect();
        if inputs.len() != self.inputs.len() {
            return Err(Error::Invalid("relabelling merges input symbols".into()));
        }
        Ok(Self {
            inputs,
            ..self.clone()
        })
    }

    /// The transducer over `Σ1 ∪ Σ2` in which each component reads the letters
    /// of its own alphabet; reachable product states only.
    pub fn shuffle(t1: &Self, t2: &Self) -> Result<Self> {
        if let Some(a) = t1.inputs.iter().find(|a| t2.inputs.contains(*a)) {
            return Err(Error::OverlappingAlphabets(a.clone()));
        }
        let inputs: IndexSet<String> = t1.inputs.iter().chain(&t2.inputs).cloned().collect();
        let outputs: IndexSet<String> = t1.outputs.iter().chain(&t2.outputs).cloned().collect();
        let map1: Vec<usize> = t1
            .outputs
            .iter()
            .map(|o| outputs.get_index_of(o).expect("merged"))
            .collect();
        let map2: Vec<usize> = t2
            .outputs
            .iter()
            .map(|o| outputs.get_index_of(o).expect("merged"))
            .collect();
        let mut pairs: IndexSet<(usize, usize)> = IndexSet::new();
        pairs.insert((t1.initial, t2.initial));
        let mut delta = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            let mut row = Vec::with_capacity(inputs.len());
            for a in 0..inputs.len() {
                let (next, word) = if a < t1.inputs.len() {
                    let (r, w) = &t1.delta[p][a];
                    ((*r, q), w.iter().map(|&o| map1[o]).collect())
                } else {
                    let (r, w) = &t2.delta[q][a - t1.inputs.len()];
                    ((p, *r), w.iter().map(|&o| map2[o]).collect())
                };
                row.push((pairs.insert_full(next).0, word));
            }
            delta.push(row);
            i += 1;
        }
        let states = pairs
            .iter()
            .map(|&(p, q)| format!("({},{})", t1.states[p], t2.states[q]))
            .collect();
        Ok(Self {
            states,
            initial: 0,
            inputs,
            outputs,
            delta,
        })
    }

    /// Parses the text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut states: Vec<&str> = Vec::new();
        let mut init: Option<&str> = None;
        let mut inputs: Vec<&str> = Vec::new();
        let mut outputs: Vec<&str> = Vec::new();
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |col: usize, message: String| Error::Parse {
                line: line_no,
                col,
                message,
            };
            let col_of = |tok: &str| tok.as_ptr() as usize - line.as_ptr() as usize + 1;
            if let Some((key, rest)) = trimmed.split_once(':') {
                if !key.contains(char::is_whitespace) {
                    let items = rest.split_whitespace();
                    match key {
                        "states" => states.extend(items),
                        "in" => inputs.extend(items),
                        "out" => outputs.extend(items),
                        "init" => {
                            let v: Vec<&str> = items.collect();
                            if v.len() != 1 {
                                return Err(err(col_of(key), "`init:` takes one state".into()));
                            }
                            init = Some(v[0]);
                        }
                        _ => {
                            return Err(err(col_of(key), format!("unknown header `{key}:`")))
                        }
                    }
                    continue;
                }
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() < 5 || toks[2] != "->" {
                return Err(err(
                    col_of(toks[0]),
                    "expected `q <in> -> q' <out...>`".into(),
                ));
            }
            entries.push((line_no, toks));
        }
        let init = init.ok_or_else(|| Error::Parse {
            line: text.lines().count().max(1),
            col: 1,
            message: "missing `init:` header".into(),
        })?;
        let table: Vec<Entry> = entries
            .iter()
            .map(|(_, t)| (t[0], t[1], t[3], t[4..].to_vec()))
            .collect();
        Self::new(&states, init, &inputs, &outputs, table).map_err(|e| {
            let line = entries.first().map_or(1, |e| e.0);
            match e {
                Error::Parse { .. } => e,
                other => Error::Parse {
                    line,
                    col: 1,
                    message: other.to_string(),
                },
            }
        })
    }

    /// Renders the text format; `parse` reproduces `self`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let join = |s: &IndexSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "states: {}", join(&self.states));
        let _ = writeln!(out, "init: {}", self.states[self.initial]);
        let _ = writeln!(out, "in: {}", join(&self.inputs));
        let _ = writeln!(out, "out: {}", join(&self.outputs));
        for (q, row) in self.delta.iter().enumerate() {
            for (a, (r, w)) in row.iter().enumerate() {
                let word: Vec<&str> = w.iter().map(|&o| self.outputs[o].as_str()).collect();
                let _ = writeln!(
                    out,
                    "{} {} -> {} {}",
                    self.states[q],
                    self.inputs[a],
                    self.states[*r],
                    word.join(" ")
                );
            }
        }
        out
    }
}

/// The single-state transducer mapping every letter of `alphabet` to `word`.
pub fn homomorphism_transducer<S: AsRef<str>>(alphabet: &[S], word: &[S]) -> Result<Transducer> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    let inputs: Vec<&str> = alphabet.iter().map(AsRef::as_ref).collect();
    let mut outputs: Vec<&str> = word.iter().map(AsRef::as_ref).collect();
    let w = outputs.clone();
    outputs.sort_unstable();
    outputs.dedup();
    Transducer::new(
        &["h"],
        "h",
        &inputs,
        &outputs,
        inputs.iter().map(|a| ("h", *a, "h", w.clone())),
    )
}
