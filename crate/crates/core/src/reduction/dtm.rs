//! Space-bounded deterministic Turing machines and their encoding as
//! transducer machines.
//!
//! A configuration is written cell by cell, `B` bits per cell, followed by
//! zero padding up to `ℓ` bits. A cell holds either a tape symbol or a
//! state together with the symbol under the head. Codes `0^B` and `1^B` are
//! never used for cells, so the initial configuration can be written `1^ℓ`
//! and the accepting one `0^ℓ` without clashing with any other encoding.
//!
//! `T1` rewrites the encoding of `c` into the cell codes of the successor
//! of `c`, and `T2` rewrites the encoding of `c` into the cell codes of `c`.
//! Both lag `D = 2B` letters behind their input: they print `_` for the
//! first `D` letters, then `c0`/`c1` per bit, and finally one packed letter
//! `p…` holding the bits still owed. The packed letter is replaced by `?`
//! when the input encodes no configuration, and by `!` (only in `T1`) when
//! the configuration has no successor.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use indexmap::IndexSet;

use crate::counters::tow_bounded;
use crate::error::{Error, Result};
use crate::transducer::Transducer;

use super::machine::TransducerMachine;

/// Largest `ℓ` for which transducers are built.
pub const MAX_DTM_ELL: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Left => "L",
            Move::Right => "R",
            Move::Stay => "S",
        })
    }
}

/// A deterministic machine working on `space` cells. The first tape symbol
/// is the blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtmSpec {
    states: IndexSet<String>,
    tape: IndexSet<String>,
    init: usize,
    accept: usize,
    reject: usize,
    space: usize,
    delta: HashMap<(usize, usize), (usize, usize, Move)>,
}

/// State, head position and tape contents, all as indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DtmConfig {
    pub state: usize,
    pub head: usize,
    pub tape: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtmHalt {
    Accepted,
    Rejected,
    /// The head would leave the cells.
    OutOfSpace,
    StepBudget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtmRun {
    pub trace: Vec<DtmConfig>,
    pub halt: DtmHalt,
}

impl DtmSpec {
    pub fn new<'a>(
        states: &[&str],
        tape: &[&str],
        (init, accept, reject): (&str, &str, &str),
        space: usize,
        transitions: impl IntoIterator<Item = (&'a str, &'a str, &'a str, &'a str, Move)>,
    ) -> Result<Self> {
        let set = |xs: &[&str], kind: &str| -> Result<IndexSet<String>> {
            let mut out = IndexSet::new();
            for x in xs {
                if x.is_empty() || x.contains(char::is_whitespace) {
                    return Err(Error::InvalidName(x.to_string()));
                }
                if !out.insert(x.to_string()) {
                    return Err(Error::Invalid(format!("duplicate {kind} `{x}`")));
                }
            }
            if out.is_empty() {
                return Err(Error::Invalid(format!("no {kind}s declared")));
            }
            Ok(out)
        };
        let states = set(states, "state")?;
        let tape = set(tape, "tape symbol")?;
        let state = |s: &str| states.get_index_of(s).ok_or_else(|| Error::UnknownState(s.into()));
        let symbol = |s: &str| tape.get_index_of(s).ok_or_else(|| Error::UnknownSymbol(s.into()));
        let (init, accept, reject) = (state(init)?, state(accept)?, state(reject)?);
        if accept == reject {
            return Err(Error::Invalid("accepting and rejecting states coincide".into()));
        }
        if space == 0 {
            return Err(Error::Invalid("space bound must be at least 1".into()));
        }
        let mut delta = HashMap::new();
        for (q, a, r, b, m) in transitions {
            let (qi, ai) = (state(q)?, symbol(a)?);
            if qi == accept || qi == reject {
                return Err(Error::Invalid(format!("halting state `{q}` has a transition")));
            }
            if delta.insert((qi, ai), (state(r)?, symbol(b)?, m)).is_some() {
                return Err(Error::Nondeterministic(format!("two transitions from `{q}` on `{a}`")));
            }
        }
        for (qi, q) in states.iter().enumerate() {
            if qi == accept || qi == reject {
                continue;
            }
            for (ai, a) in tape.iter().enumerate() {
                if !delta.contains_key(&(qi, ai)) {
                    return Err(Error::Invalid(format!("no transition from `{q}` on `{a}`")));
                }
            }
        }
        Ok(Self {
            states,
            tape,
            init,
            accept,
            reject,
            space,
            delta,
        })
    }

    /// Parses the text format:
    ///
    /// ```text
    /// states: q0 q1 acc rej
    /// tape: _ x
    /// init: q0
    /// accept: acc
    /// reject: rej
    /// space: 2
    /// q0 _ -> q1 x R
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut headers: HashMap<&str, (usize, Vec<&str>)> = HashMap::new();
        let mut trans = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let col = |tok: &str| tok.as_ptr() as usize - line.as_ptr() as usize + 1;
            let err = |tok: &str, message: String| Error::Parse {
                line: line_no,
                col: col(tok),
                message,
            };
            if let Some((key, rest)) = trimmed.split_once(':') {
                let key = key.trim_end();
                if !["states", "tape", "init", "accept", "reject", "space"].contains(&key) {
                    return Err(err(key, format!("unknown header `{key}:`")));
                }
                if headers.insert(key, (line_no, rest.split_whitespace().collect())).is_some() {
                    return Err(err(key, format!("repeated header `{key}:`")));
                }
                continue;
            }
            let t: Vec<&str> = trimmed.split_whitespace().collect();
            if t.len() != 6 || t[2] != "->" {
                return Err(err(t[0], "expected `q s -> q' s' L|R|S`".into()));
            }
            let m = match t[5] {
                "L" => Move::Left,
                "R" => Move::Right,
                "S" => Move::Stay,
                other => return Err(err(t[5], format!("unknown head move `{other}`"))),
            };
            trans.push((line_no, t[0], t[1], t[3], t[4], m));
        }
        let last = text.lines().count().max(1);
        let get = |key: &str| -> Result<(usize, Vec<&str>)> {
            headers.get(key).cloned().ok_or_else(|| Error::Parse {
                line: last,
                col: 1,
                message: format!("missing `{key}:` header"),
            })
        };
        let one = |key: &str| -> Result<(usize, &str)> {
            let (line, v) = get(key)?;
            match v.as_slice() {
                [x] => Ok((line, *x)),
                _ => Err(Error::Parse {
                    line,
                    col: 1,
                    message: format!("`{key}:` takes one value"),
                }),
            }
        };
        let (states_line, states) = get("states")?;
        let (_, tape) = get("tape")?;
        let (_, init) = one("init")?;
        let (_, accept) = one("accept")?;
        let (_, reject) = one("reject")?;
        let (space_line, space) = one("space")?;
        let space: usize = space.parse().map_err(|_| Error::Parse {
            line: space_line,
            col: 1,
            message: format!("`{space}` is not a cell count"),
        })?;
        let first = trans.first().map_or(states_line, |t| t.0);
        Self::new(
            &states,
            &tape,
            (init, accept, reject),
            space,
            trans.iter().map(|&(_, q, a, r, b, m)| (q, a, r, b, m)),
        )
        .map_err(|e| Error::Parse {
            line: first,
            col: 1,
            message: e.to_string(),
        })
    }

    /// Renders the text format; `parse` reproduces `self`.
    pub fn emit(&self) -> String {
        let join = |s: &IndexSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        let mut out = format!(
            "states: {}\ntape: {}\ninit: {}\naccept: {}\nreject: {}\nspace: {}\n",
            join(&self.states),
            join(&self.tape),
            self.states[self.init],
            self.states[self.accept],
            self.states[self.reject],
            self.space
        );
        let mut keys: Vec<_> = self.delta.keys().copied().collect();
        keys.sort_unstable();
        for (q, a) in keys {
            let (r, b, m) = self.delta[&(q, a)];
            out.push_str(&format!(
                "{} {} -> {} {} {m}\n",
                self.states[q], self.tape[a], self.states[r], self.tape[b]
            ));
        }
        out
    }

    pub fn states(&self) -> &IndexSet<String> {
        &self.states
    }

    pub fn tape(&self) -> &IndexSet<String> {
        &self.tape
    }

    pub fn space(&self) -> usize {
        self.space
    }

    fn halting(&self, q: usize) -> bool {
        q == self.accept || q == self.reject
    }

    /// Blank tape, head on the first cell.
    pub fn initial_config(&self) -> DtmConfig {
        self.blank_config(self.init)
    }

    /// The accepting configuration: blank tape, head on the first cell.
    pub fn accepting_config(&self) -> DtmConfig {
        self.blank_config(self.accept)
    }

    fn blank_config(&self, state: usize) -> DtmConfig {
        DtmConfig {
            state,
            head: 0,
            tape: vec![0; self.space],
        }
    }

    /// The next configuration, or `None` in a halting state or when the
    /// head would leave the cells.
    pub fn successor(&self, c: &DtmConfig) -> Option<DtmConfig> {
        if self.halting(c.state) {
            return None;
        }
        let (q, b, m) = self.delta[&(c.state, c.tape[c.head])];
        let head = match m {
            Move::Left => c.head.checked_sub(1)?,
            Move::Right if c.head + 1 >= self.space => return None,
            Move::Right => c.head + 1,
            Move::Stay => c.head,
        };
        let mut tape = c.tape.clone();
        tape[c.head] = b;
        Some(DtmConfig { state: q, head, tape })
    }

    /// Runs from the initial configuration.
    pub fn run(&self, max_steps: usize) -> DtmRun {
        let mut trace = vec![self.initial_config()];
        loop {
            let c = trace.last().expect("nonempty");
            let halt = if c.state == self.accept {
                Some(DtmHalt::Accepted)
            } else if c.state == self.reject {
                Some(DtmHalt::Rejected)
            } else {
                None
            };
            if let Some(halt) = halt {
                return DtmRun { trace, halt };
            }
            if trace.len() > max_steps {
                return DtmRun {
                    trace,
                    halt: DtmHalt::StepBudget,
                };
            }
            match self.successor(c) {
                Some(next) => trace.push(next),
                None => {
                    return DtmRun {
                        trace,
                        halt: DtmHalt::OutOfSpace,
                    }
                }
            }
        }
    }

    /// Every configuration within the space bound.
    pub fn all_configs(&self) -> Vec<DtmConfig> {
        let g = self.tape.len();
        let tapes = g.pow(self.space as u32);
        let mut out = Vec::with_capacity(self.states.len() * self.space * tapes);
        for state in 0..self.states.len() {
            for head in 0..self.space {
                for mut t in 0..tapes {
                    let tape = (0..self.space)
                        .map(|_| {
                            let s = t % g;
                            t /= g;
                            s
                        })
                        .collect();
                    out.push(DtmConfig { state, head, tape });
                }
            }
        }
        out
    }

    pub fn show(&self, c: &DtmConfig) -> String {
        let cells: Vec<String> = c
            .tape
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                if i == c.head {
                    format!("[{} {}]", self.states[c.state], self.tape[s])
                } else {
                    self.tape[s].clone()
                }
            })
            .collect();
        cells.join(" ")
    }
}

/// Cell contents as one index: tape symbols first, then `(state, symbol)`
/// pairs.
type Cell = u16;

/// The bit layout of configurations of one machine.
#[derive(Debug, Clone)]
pub struct DtmEncoding {
    spec: DtmSpec,
    ell: usize,
    block: usize,
    delay: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Mode {
    /// The first cell is still being read.
    Pending,
    Cells,
    /// `0^ℓ`, read as the accepting configuration.
    Zeros,
    /// `1^ℓ`, read as the initial configuration.
    Ones,
}

/// What a transducer remembers after reading a prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Scan {
    pos: usize,
    bits: u32,
    mode: Mode,
    /// The two cells before the one being read.
    window: [Option<Cell>; 2],
    queue: VecDeque<bool>,
    head_seen: bool,
    like_init: bool,
    like_accept: bool,
    bad: bool,
    stuck: bool,
}

impl DtmEncoding {
    /// The layout for `spec` in words of length `Tow(k, n)`.
    pub fn new(spec: &DtmSpec, k: u32, n: u32) -> Result<Self> {
        let ell = tow_bounded(k, u64::from(n), 16)?;
        let ell: usize = ell
            .try_into()
            .ok()
            .filter(|&l| l <= MAX_DTM_ELL)
            .ok_or_else(|| Error::Magnitude { max_bits: 12 })?;
        let cells = spec.tape.len() * (1 + spec.states.len());
        let mut block = 1;
        while (1usize << block) < cells + 2 {
            block += 1;
        }
        if spec.space * block > ell {
            return Err(Error::SpaceBound {
                space: spec.space,
                cells: ell / block,
            });
        }
        Ok(Self {
            spec: spec.clone(),
            ell,
            block,
            delay: 2 * block,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Bits per cell.
    pub fn block(&self) -> usize {
        self.block
    }

    /// Letters printed before the first bit.
    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn spec(&self) -> &DtmSpec {
        &self.spec
    }

    fn cells(&self, c: &DtmConfig) -> Vec<Cell> {
        let g = self.spec.tape.len();
        c.tape
            .iter()
            .enumerate()
            .map(|(i, &s)| if i == c.head { g + c.state * g + s } else { s } as Cell)
            .collect()
    }

    fn cell_bits(&self, cell: Cell, out: &mut impl Extend<bool>) {
        let code = u32::from(cell) + 1;
        out.extend((0..self.block).rev().map(|i| code >> i & 1 == 1));
    }

    /// Cell codes followed by zero padding, ignoring the two reserved words.
    fn plain(&self, c: &DtmConfig) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.ell);
        for cell in self.cells(c) {
            self.cell_bits(cell, &mut out);
        }
        out.resize(self.ell, false);
        out
    }

    pub fn encode(&self, c: &DtmConfig) -> Vec<bool> {
        if *c == self.spec.initial_config() {
            vec![true; self.ell]
        } else if *c == self.spec.accepting_config() {
            vec![false; self.ell]
        } else {
            self.plain(c)
        }
    }

    pub fn decode(&self, z: &[bool]) -> Option<DtmConfig> {
        if z.len() != self.ell {
            return None;
        }
        if z.iter().all(|&b| b) {
            return Some(self.spec.initial_config());
        }
        if z.iter().all(|&b| !b) {
            return Some(self.spec.accepting_config());
        }
        let g = self.spec.tape.len();
        let mut head = None;
        let mut state = 0;
        let mut tape = Vec::with_capacity(self.spec.space);
        for i in 0..self.spec.space {
            let code = z[i * self.block..(i + 1) * self.block]
                .iter()
                .fold(0usize, |acc, &b| acc << 1 | usize::from(b));
            let cell = code.checked_sub(1).filter(|&c| c < g * (1 + self.spec.states.len()))?;
            if cell < g {
                tape.push(cell);
            } else {
                if head.is_some() {
                    return None;
                }
                head = Some(i);
                state = (cell - g) / g;
                tape.push((cell - g) % g);
            }
        }
        if z[self.spec.space * self.block..].iter().any(|&b| b) {
            return None;
        }
        let c = DtmConfig {
            state,
            head: head?,
            tape,
        };
        (self.encode(&c) == z).then_some(c)
    }

    fn split(&self, cell: Cell) -> Option<(usize, usize)> {
        let g = self.spec.tape.len();
        let cell = usize::from(cell);
        (cell >= g).then(|| ((cell - g) / g, (cell - g) % g))
    }

    fn symbol_of(&self, cell: Cell) -> usize {
        self.split(cell).map_or(usize::from(cell), |(_, s)| s)
    }

    /// Cell `i` one step later, from cells `i-1`, `i`, `i+1`; `None` when
    /// the head is on cell `i` and cannot move.
    fn step_cell(&self, i: usize, left: Option<Cell>, mid: Cell, right: Option<Cell>) -> Option<Cell> {
        let g = self.spec.tape.len();
        let with_head = |q: usize, s: usize| (g + q * g + s) as Cell;
        if let Some((q, s)) = self.split(mid) {
            if self.spec.halting(q) {
                return None;
            }
            let (r, b, m) = self.spec.delta[&(q, s)];
            return match m {
                Move::Stay => Some(with_head(r, b)),
                Move::Left if i == 0 => None,
                Move::Right if i + 1 == self.spec.space => None,
                _ => Some(b as Cell),
            };
        }
        let arriving = |from: Option<Cell>, dir: Move| {
            let (q, s) = self.split(from?)?;
            if self.spec.halting(q) {
                return None;
            }
            let (r, _, m) = self.spec.delta[&(q, s)];
            (m == dir).then_some(r)
        };
        Some(match arriving(left, Move::Right).or_else(|| arriving(right, Move::Left)) {
            Some(r) => with_head(r, usize::from(mid)),
            None => mid,
        })
    }

    /// Reads one bit. `successor` selects `T1`'s behaviour.
    fn advance(&self, s: &Scan, bit: bool, successor: bool) -> (Scan, String) {
        let mut s = s.clone();
        let cells_end = self.spec.space * self.block;
        let total = self.spec.tape.len() * (1 + self.spec.states.len());
        let full = (1u32 << self.block) - 1;
        if s.pos < cells_end {
            s.bits = s.bits << 1 | u32::from(bit);
            if (s.pos + 1) % self.block == 0 {
                let i = s.pos / self.block;
                let code = std::mem::take(&mut s.bits);
                if s.mode == Mode::Pending {
                    s.mode = match code {
                        0 => Mode::Zeros,
                        c if c == full => Mode::Ones,
                        _ => Mode::Cells,
                    };
                }
                let cell = match s.mode {
                    Mode::Zeros | Mode::Ones => {
                        let (expect, c) = if s.mode == Mode::Zeros {
                            (0, self.spec.accepting_config())
                        } else {
                            (full, self.spec.initial_config())
                        };
                        s.bad |= code != expect;
                        self.cells(&c)[i]
                    }
                    _ => {
                        let cell = match code.checked_sub(1) {
                            Some(c) if (c as usize) < total => c as Cell,
                            _ => {
                                s.bad = true;
                                0
                            }
                        };
                        if self.split(cell).is_some() {
                            s.bad |= s.head_seen;
                            s.head_seen = true;
                        }
                        s.like_init &= self.cells(&self.spec.initial_config())[i] == cell;
                        s.like_accept &= self.cells(&self.spec.accepting_config())[i] == cell;
                        cell
                    }
                };
                let [before, prev] = s.window;
                let emit = |s: &mut Scan, j: usize, l: Option<Cell>, m: Cell, r: Option<Cell>| {
                    let new = if successor {
                        self.step_cell(j, l, m, r).unwrap_or_else(|| {
                            s.stuck = true;
                            self.symbol_of(m) as Cell
                        })
                    } else {
                        m
                    };
                    self.cell_bits(new, &mut s.queue);
                };
                if let Some(p) = prev {
                    emit(&mut s, i - 1, before, p, Some(cell));
                }
                if i + 1 == self.spec.space {
                    emit(&mut s, i, prev, cell, None);
                    if s.mode == Mode::Cells {
                        s.bad |= !s.head_seen || s.like_init || s.like_accept;
                    }
                }
                s.window = [prev, Some(cell)];
            }
        } else {
            s.bad |= bit != (s.mode == Mode::Ones);
            s.queue.push_back(false);
        }
        let t = s.pos;
        s.pos += 1;
        let out = if s.pos == self.ell {
            if s.bad {
                "?".to_string()
            } else if s.stuck {
                "!".to_string()
            } else {
                let rest: String = s.queue.drain(..).map(|b| if b { '1' } else { '0' }).collect();
                format!("p{rest}")
            }
        } else if t < self.delay {
            "_".to_string()
        } else {
            let b = s.queue.pop_front().expect("cells are queued ahead of the delay");
            if b { "c1" } else { "c0" }.to_string()
        };
        (s, out)
    }

    fn start(&self) -> Scan {
        Scan {
            pos: 0,
            bits: 0,
            mode: Mode::Pending,
            window: [None, None],
            queue: VecDeque::new(),
            head_seen: false,
            like_init: true,
            like_accept: true,
            bad: false,
            stuck: false,
        }
    }

    /// The transition table of `T1` (`successor`) or `T2`, explored from
    /// the start state. The state after the last letter loops on a marker.
    fn table(&self, successor: bool) -> (Vec<String>, Vec<(usize, bool, usize, String)>) {
        let mut ids: IndexSet<Scan> = IndexSet::new();
        ids.insert(self.start());
        let mut edges = Vec::new();
        let mut i = 0;
        while i < ids.len() {
            let s = ids[i].clone();
            for bit in [false, true] {
                let (next, out) = if s.pos == self.ell {
                    (s.clone(), "?".to_string())
                } else {
                    self.advance(&s, bit, successor)
                };
                let (j, _) = ids.insert_full(next);
                edges.push((i, bit, j, out));
            }
            i += 1;
        }
        ((0..ids.len()).map(|i| format!("s{i}")).collect(), edges)
    }

    /// Builds `(ℓ, T1, T2)`.
    pub fn machine(&self) -> Result<TransducerMachine> {
        let t1 = self.table(true);
        let t2 = self.table(false);
        let mut outputs: Vec<String> = t1.1.iter().chain(&t2.1).map(|e| e.3.clone()).collect();
        outputs.sort();
        outputs.dedup();
        let outs: Vec<&str> = outputs.iter().map(String::as_str).collect();
        let build = |(states, edges): &(Vec<String>, Vec<(usize, bool, usize, String)>)| {
            let names: Vec<&str> = states.iter().map(String::as_str).collect();
            Transducer::new(
                &names,
                names[0],
                &["0", "1"],
                &outs,
                edges.iter().map(|(q, b, r, o)| {
                    (
                        names[*q],
                        if *b { "1" } else { "0" },
                        names[*r],
                        vec![o.as_str()],
                    )
                }),
            )
        };
        TransducerMachine::new(self.ell, build(&t1)?, build(&t2)?)
    }
}

/// Encodes `spec` as a transducer machine of length `Tow(k, n)`.
pub fn encode_dtm(spec: &DtmSpec, k: u32, n: u32) -> Result<TransducerMachine> {
    DtmEncoding::new(spec, k, n)?.machine()
}
