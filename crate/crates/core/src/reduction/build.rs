//! Lazy instantiation of the reduction's control states and macro rules.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexSet;
use num_bigint::BigUint;

use crate::counters::tow_bounded;
use crate::error::{Error, Result};
use crate::lts::{ActionLabel, Config, ControlState, Pda, PdaBuilder, Rule, StackSymbol};
use crate::macros::{expand, ChoiceOption, MacroRule, StatePair};
use crate::regex::ClassRegex;
use crate::transducer::{homomorphism_transducer, Transducer};

use super::inc::make_inc_transducers;
use super::machine::TransducerMachine;

/// Basic symbols; a control state is a word of them with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basic {
    Start,
    Start0,
    Stop(u32),
    TestDec(u32),
    TestDec1(u32),
    Ones(u32),
    Ones0(u32),
    Ones1(u32),
    DecOk(u32),
    Zero(u32),
    Zero0(u32),
    Zero1(u32),
    Dec(u32),
    Dec0(u32),
    Dec1(u32),
    /// `dec^(i)_0`, guessing bit `i` of a decremented 0-counter.
    DecBit(u32),
    ZOnes(u32),
    ZOnes0(u32),
    ZOnes1(u32),
    Fin,
    TestFin,
    PopAll,
    Next,
    Next0,
    Next1,
    Tran,
    TestTran,
    TestTran1,
}

impl fmt::Display for Basic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Basic::*;
        match *self {
            Start => write!(f, "start"),
            Start0 => write!(f, "start^0"),
            Stop(l) => write!(f, "stop_{l}"),
            TestDec(l) => write!(f, "testDec_{l}"),
            TestDec1(l) => write!(f, "testDec^1_{l}"),
            Ones(l) => write!(f, "ones_{l}"),
            Ones0(l) => write!(f, "ones^0_{l}"),
            Ones1(l) => write!(f, "ones^1_{l}"),
            DecOk(l) => write!(f, "decOk_{l}"),
            Zero(l) => write!(f, "zero_{l}"),
            Zero0(l) => write!(f, "zero^0_{l}"),
            Zero1(l) => write!(f, "zero^1_{l}"),
            Dec(l) => write!(f, "dec_{l}"),
            Dec0(l) => write!(f, "dec^0_{l}"),
            Dec1(l) => write!(f, "dec^1_{l}"),
            DecBit(i) => write!(f, "dec^({i})_0"),
            ZOnes(l) => write!(f, "zOnes_{l}"),
            ZOnes0(l) => write!(f, "zOnes^0_{l}"),
            ZOnes1(l) => write!(f, "zOnes^1_{l}"),
            Fin => write!(f, "fin"),
            TestFin => write!(f, "testFin"),
            PopAll => write!(f, "popAll"),
            Next => write!(f, "next"),
            Next0 => write!(f, "next^0"),
            Next1 => write!(f, "next^1"),
            Tran => write!(f, "tran"),
            TestTran => write!(f, "testTran"),
            TestTran1 => write!(f, "testTran^1"),
        }
    }
}

/// The pair named by a word of basic symbols, joined with `:`.
pub fn word_pair(word: &[Basic]) -> StatePair {
    let name: Vec<String> = word.iter().map(ToString::to_string).collect();
    StatePair::new(name.join(":")).expect("basic symbol names are valid")
}

/// The built system with the two start configurations.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub pda: Pda,
    pub left: Config,
    pub right: Config,
}

/// Parameters of a build: counter levels `0..=k`, base width `n`, and
/// whether the normed amendments apply.
#[derive(Debug, Clone)]
pub struct Construction {
    k: u32,
    n: u32,
    normed: bool,
    omega: IndexSet<StackSymbol>,
    machine: Option<(Transducer, Transducer)>,
}

fn om(bit: bool, level: u32) -> StackSymbol {
    StackSymbol::omega(bit, level)
}

fn names(symbols: impl IntoIterator<Item = StackSymbol>) -> Vec<String> {
    symbols.into_iter().map(|s| s.name().to_string()).collect()
}

impl Construction {
    pub fn new(k: u32, n: u32, normed: bool) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::Invalid("k and n must be at least 1".into()));
        }
        let omega = (0..=k + 1)
            .flat_map(|l| [om(false, l), om(true, l)])
            .collect();
        Ok(Self {
            k,
            n,
            normed,
            omega,
            machine: None,
        })
    }

    /// Attaches the transducer machine tested by `testTran^1`.
    pub fn with_machine(mut self, tm: &TransducerMachine) -> Result<Self> {
        let expected = tow_bounded(self.k, u64::from(self.n), 64).ok();
        if expected != Some(BigUint::from(tm.ell())) {
            return Err(Error::LengthMismatch {
                expected: expected.map_or("a tower too large".into(), |e| e.to_string()),
                found: tm.ell().to_string(),
            });
        }
        let reserved = ["0", "1", "#", "a", "b"];
        for t in [tm.t1(), tm.t2()] {
            if let Some(o) = t.outputs().iter().find(|o| reserved.contains(&o.as_str())) {
                return Err(Error::AlphabetCollision(o.clone()));
            }
        }
        let relabel: BTreeMap<String, String> = [
            ("0".to_string(), om(false, self.k).name().to_string()),
            ("1".to_string(), om(true, self.k).name().to_string()),
        ]
        .into();
        let t1 = self.complete(&tm.t1().relabel_inputs(&relabel)?)?;
        let t2 = self.complete(&tm.t2().relabel_inputs(&relabel)?)?;
        self.machine = Some((t1, t2));
        Ok(self)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn normed(&self) -> bool {
        self.normed
    }

    /// The stack alphabet `Ω_{≤k+1}`.
    pub fn alphabet(&self) -> &IndexSet<StackSymbol> {
        &self.omega
    }

    /// The separator `$ = 0_{k+1}`.
    pub fn dollar(&self) -> StackSymbol {
        om(false, self.k + 1)
    }

    /// Shuffles `t` with `a`-output on every stack symbol it does not read.
    fn complete(&self, t: &Transducer) -> Result<Transducer> {
        let rest: Vec<String> = self
            .omega
            .iter()
            .filter(|s| !t.inputs().contains(s.name()))
            .map(|s| s.name().to_string())
            .collect();
        if rest.is_empty() {
            return Ok(t.clone());
        }
        Transducer::shuffle(t, &homomorphism_transducer(&rest, &["a".to_string()])?)
    }

    fn hom(&self, word: &[&str]) -> Transducer {
        let all = names(self.omega.iter().cloned());
        let word: Vec<String> = word.iter().map(|s| s.to_string()).collect();
        homomorphism_transducer(&all, &word).expect("nonempty word")
    }

    fn upto(&self, level: u32) -> Vec<StackSymbol> {
        (0..=level).flat_map(|l| [om(false, l), om(true, l)]).collect()
    }

    fn levels(&self, level: u32) -> [StackSymbol; 2] {
        [om(false, level), om(true, level)]
    }

    fn tow_is_two(&self, level: u32) -> bool {
        tow_bounded(level, u64::from(self.n), 2).ok() == Some(BigUint::from(2u32))
    }

    /// `(Ω_{≤ℓ-1}* Ω_ℓ)* Ω_{ℓ+1}` or, at level 0, `Ω_0* Ω_1`; `close`
    /// replaces the final class.
    fn counter_guard(&self, level: u32, close: ClassRegex) -> ClassRegex {
        if level == 0 {
            return ClassRegex::seq([ClassRegex::omega(0).star(), close]);
        }
        let block = ClassRegex::seq([ClassRegex::omega_upto(level - 1).star(), ClassRegex::omega(level)]);
        ClassRegex::seq([block.star(), close])
    }

    /// `Ω_{≤ℓ}* c` repeated `times` times.
    fn blocks(&self, level: u32, close: &ClassRegex, times: usize) -> ClassRegex {
        ClassRegex::seq(
            (0..times).flat_map(|_| [ClassRegex::omega_upto(level).star(), close.clone()]),
        )
    }

    /// Builds the system generated from the given root words.
    pub fn build(&self, roots: &[Vec<Basic>]) -> Result<Pda> {
        let mut work: IndexSet<Vec<Basic>> = roots.iter().cloned().collect();
        let mut builder = PdaBuilder::new();
        for s in &self.omega {
            builder.declare_symbol(s.clone());
        }
        let mut i = 0;
        while i < work.len() {
            let word = work[i].clone();
            let pair = word_pair(&word);
            builder.declare_state(pair.left());
            builder.declare_state(pair.right());
            let mut targets = Vec::new();
            for m in self.macros_for(&word, &mut targets)? {
                builder.extend(expand(&m, &self.omega)?.rules);
            }
            if word == [Basic::PopAll] {
                for pol in [pair.left(), pair.right()] {
                    for s in &self.omega {
                        builder.add_rule(Rule::pop(pol.clone(), s.clone(), act("a"), pol.clone()));
                    }
                }
            }
            work.extend(targets);
            i += 1;
        }
        Ok(builder.build())
    }

    /// Builds the full system from `start` and returns its start pair.
    pub fn build_start(&self) -> Result<ReductionInstance> {
        if self.machine.is_none() {
            return Err(Error::Invalid("no transducer machine attached".into()));
        }
        let pda = self.build(&[vec![Basic::Start]])?;
        let start = word_pair(&[Basic::Start]);
        Ok(ReductionInstance {
            pda,
            left: Config::new(start.left(), Vec::new()),
            right: Config::new(start.right(), Vec::new()),
        })
    }

    /// The macros whose source is `word`; target words go to `targets`.
    fn macros_for(&self, word: &[Basic], targets: &mut Vec<Vec<Basic>>) -> Result<Vec<MacroRule>> {
        use Basic::*;
        let (k, n, normed) = (self.k, self.n, self.normed);
        let head = word[0];
        let rest = &word[1..];
        let src = word_pair(word);
        let cat = |pre: &[Basic]| -> Vec<Basic> { [pre, rest].concat() };
        let dollar = self.dollar();

        let mut out = Vec::new();
        let mut push = |dst: Vec<Basic>, pushed: Vec<StackSymbol>, targets: &mut Vec<Vec<Basic>>| {
            out.push(MacroRule::PairPush {
                src: src.clone(),
                dst: word_pair(&dst),
                pushed,
            });
            targets.push(dst);
        };
        let options = |opts: Vec<(Vec<Basic>, Vec<StackSymbol>)>, targets: &mut Vec<Vec<Basic>>| {
            opts.into_iter()
                .map(|(w, pushed)| {
                    let pair = word_pair(&w);
                    targets.push(w);
                    (pair, pushed)
                })
                .collect::<Vec<ChoiceOption>>()
        };
        let def = |opts, targets: &mut Vec<Vec<Basic>>| MacroRule::DefChoice {
            src: src.clone(),
            options: options(opts, targets),
        };
        let att = |opts, targets: &mut Vec<Vec<Basic>>| MacroRule::AttChoice {
            src: src.clone(),
            options: options(opts, targets),
        };
        let guarded = |pol_left: bool, guard: ClassRegex, trans: Transducer, dst: &[Basic]| {
            let d = word_pair(dst);
            let (s, t) = if pol_left {
                (src.left(), d.left())
            } else {
                (src.right(), d.right())
            };
            MacroRule::GuardedPop {
                src: s,
                guard,
                trans,
                dst: t,
            }
        };

        let mut extra = Vec::new();
        match head {
            Start => {
                let next = if normed { Start0 } else { Fin };
                push(cat(&[Ones(k), next]), vec![dollar.clone()], targets);
            }
            Start0 => push(cat(&[Ones(k), Fin]), vec![dollar.clone()], targets),
            Fin => extra.push(def(
                vec![(vec![TestFin], vec![]), (vec![Next], vec![dollar.clone()])],
                targets,
            )),
            TestFin => {
                let guard = self.counter_guard(k, ClassRegex::class([dollar.clone()]));
                let one_k = om(true, k);
                let others: Vec<String> = names(self.omega.iter().filter(|s| **s != one_k).cloned());
                let left = Transducer::shuffle(
                    &homomorphism_transducer(&[one_k.name().to_string()], &["b".to_string()])?,
                    &homomorphism_transducer(&others, &["a".to_string()])?,
                )?;
                extra.push(guarded(true, guard.clone(), left, &[PopAll]));
                extra.push(guarded(false, guard, self.hom(&["a"]), &[PopAll]));
                targets.push(vec![PopAll]);
            }
            PopAll => {}
            Next => {
                let next = if normed { Next0 } else { Next1 };
                let opts = self
                    .levels(k)
                    .into_iter()
                    .map(|s| (vec![Ones(k - 1), next], vec![s]))
                    .collect();
                extra.push(def(opts, targets));
            }
            Next0 => {
                let dst = if self.tow_is_two(k) {
                    vec![ZOnes(k - 1), Tran]
                } else {
                    vec![ZOnes(k - 1), Next1]
                };
                let opts = self.levels(k).into_iter().map(|s| (dst.clone(), vec![s])).collect();
                extra.push(def(opts, targets));
            }
            Next1 => {
                let mut opts: Vec<(Vec<Basic>, Vec<StackSymbol>)> = self
                    .levels(k)
                    .into_iter()
                    .map(|s| (vec![Dec(k - 1), Next1], vec![s]))
                    .collect();
                opts.extend(self.levels(k).into_iter().map(|s| (vec![Zero(k - 1), Tran], vec![s])));
                extra.push(def(opts, targets));
            }
            Tran => extra.push(att(
                vec![(vec![Ones(k), TestTran], vec![dollar.clone()]), (vec![Fin], vec![])],
                targets,
            )),
            TestTran => {
                let d = ClassRegex::class([dollar.clone()]);
                extra.push(guarded(true, self.blocks(k, &d, 2), self.hom(&["a"]), &[TestTran1]));
                extra.push(guarded(false, self.blocks(k, &d, 1), self.hom(&["a", "a"]), &[TestTran1]));
                targets.push(vec![TestTran1]);
            }
            TestTran1 => {
                let (t1, t2) = self
                    .machine
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("no transducer machine attached".into()))?;
                let guard = self.counter_guard(k, ClassRegex::class([dollar.clone()]));
                extra.push(guarded(true, guard.clone(), t1.clone(), &[Stop(k)]));
                extra.push(guarded(false, guard, t2.clone(), &[Stop(k)]));
                targets.push(vec![Stop(k)]);
            }
            Stop(l) => {
                if normed {
                    let close = ClassRegex::omega(l + 1);
                    extra.push(guarded(true, self.blocks(l, &close, 1), self.hom(&["a", "a"]), &[PopAll]));
                    extra.push(guarded(false, self.blocks(l, &close, 2), self.hom(&["a"]), &[PopAll]));
                    targets.push(vec![PopAll]);
                }
            }
            TestDec(l) => {
                let close = ClassRegex::omega(l + 1);
                extra.push(guarded(true, self.blocks(l, &close, 2), self.hom(&["a"]), &[TestDec1(l)]));
                extra.push(guarded(false, self.blocks(l, &close, 1), self.hom(&["a", "a"]), &[TestDec1(l)]));
                targets.push(vec![TestDec1(l)]);
            }
            TestDec1(l) => {
                let guard = self.counter_guard(l, ClassRegex::omega(l + 1));
                let (p0, p1) = make_inc_transducers(l);
                let (p0, p1) = if l == 0 {
                    (p0, p1)
                } else {
                    let low = homomorphism_transducer(&names(self.upto(l - 1)), &["a".to_string()])?;
                    (Transducer::shuffle(&p0, &low)?, Transducer::shuffle(&p1, &low)?)
                };
                extra.push(guarded(true, guard.clone(), self.complete(&p0)?, &[Stop(l)]));
                extra.push(guarded(false, guard, self.complete(&p1)?, &[Stop(l)]));
                targets.push(vec![Stop(l)]);
            }
            Ones(0) => push(rest.to_vec(), vec![om(true, 0); n as usize], targets),
            Ones(l) => {
                let next = if normed { Ones0(l) } else { Ones1(l) };
                push(cat(&[Ones(l - 1), next]), vec![om(true, l)], targets);
            }
            Ones0(l) => {
                let dst = if self.tow_is_two(l) {
                    cat(&[ZOnes(l - 1)])
                } else {
                    cat(&[ZOnes(l - 1), Ones1(l)])
                };
                push(dst, vec![om(true, l)], targets);
            }
            Ones1(l) => extra.push(def(
                vec![
                    (cat(&[Dec(l - 1), Ones1(l)]), vec![om(true, l)]),
                    (cat(&[Zero(l - 1)]), vec![om(true, l)]),
                ],
                targets,
            )),
            DecOk(0) => {
                let mut challenge = vec![om(false, 0); n as usize];
                challenge.push(om(false, 1));
                extra.push(att(
                    vec![(rest.to_vec(), vec![]), (vec![TestDec(0)], challenge)],
                    targets,
                ));
            }
            DecOk(l) => extra.push(att(
                vec![
                    (rest.to_vec(), vec![]),
                    (vec![Ones(l), TestDec(l)], vec![om(false, l + 1)]),
                ],
                targets,
            )),
            Zero(0) => push(cat(&[DecOk(0)]), vec![om(false, 0); n as usize], targets),
            Zero(l) => {
                let next = if normed { Zero0(l) } else { Zero1(l) };
                push(cat(&[Ones(l - 1), next]), vec![om(false, l)], targets);
            }
            Zero0(l) => {
                let dst = if self.tow_is_two(l) {
                    cat(&[ZOnes(l - 1), DecOk(l)])
                } else {
                    cat(&[ZOnes(l - 1), Zero1(l)])
                };
                push(dst, vec![om(false, l)], targets);
            }
            Zero1(l) => extra.push(def(
                vec![
                    (cat(&[Dec(l - 1), Zero1(l)]), vec![om(false, l)]),
                    (cat(&[Zero(l - 1), DecOk(l)]), vec![om(false, l)]),
                ],
                targets,
            )),
            Dec(0) => {
                let opts = self.levels(0).into_iter().map(|s| (cat(&[DecBit(1)]), vec![s])).collect();
                extra.push(def(opts, targets));
            }
            DecBit(i) if i < n => {
                let opts = self
                    .levels(0)
                    .into_iter()
                    .map(|s| (cat(&[DecBit(i + 1)]), vec![s]))
                    .collect();
                extra.push(def(opts, targets));
            }
            DecBit(_) => push(cat(&[DecOk(0)]), vec![], targets),
            Dec(l) => {
                let next = if normed { Dec0(l) } else { Dec1(l) };
                let opts = self
                    .levels(l)
                    .into_iter()
                    .map(|s| (cat(&[Ones(l - 1), next]), vec![s]))
                    .collect();
                extra.push(def(opts, targets));
            }
            Dec0(l) => {
                let dst = if self.tow_is_two(l) {
                    cat(&[ZOnes(l - 1), DecOk(l)])
                } else {
                    cat(&[ZOnes(l - 1), Dec1(l)])
                };
                let opts = self.levels(l).into_iter().map(|s| (dst.clone(), vec![s])).collect();
                extra.push(def(opts, targets));
            }
            Dec1(l) => {
                let mut opts: Vec<(Vec<Basic>, Vec<StackSymbol>)> = self
                    .levels(l)
                    .into_iter()
                    .map(|s| (cat(&[Dec(l - 1), Dec1(l)]), vec![s]))
                    .collect();
                opts.extend(
                    self.levels(l)
                        .into_iter()
                        .map(|s| (cat(&[Zero(l - 1), DecOk(l)]), vec![s])),
                );
                extra.push(def(opts, targets));
            }
            ZOnes(0) => {
                let mut pushed = vec![om(false, 0)];
                pushed.extend(std::iter::repeat(om(true, 0)).take(n as usize - 1));
                push(rest.to_vec(), pushed, targets);
            }
            ZOnes(l) => push(cat(&[Ones(l - 1), ZOnes0(l)]), vec![om(true, l)], targets),
            ZOnes0(l) => {
                if self.tow_is_two(l) {
                    push(cat(&[ZOnes(l - 1)]), vec![om(false, l)], targets);
                } else {
                    push(cat(&[ZOnes(l - 1), ZOnes1(l)]), vec![om(true, l)], targets);
                }
            }
            ZOnes1(l) => extra.push(def(
                vec![
                    (cat(&[Dec(l - 1), ZOnes1(l)]), vec![om(true, l)]),
                    (cat(&[Zero(l - 1)]), vec![om(false, l)]),
                ],
                targets,
            )),
        }
        out.extend(extra);
        Ok(out)
    }
}

fn act(name: &'static str) -> ActionLabel {
    ActionLabel::from_static(name)
}

/// Builds the system for `tm` whose start pair is bisimilar iff the run of
/// `tm` ends in `0^ℓ`.
pub fn build_reduction(tm: &TransducerMachine, k: u32, n: u32, normed: bool) -> Result<ReductionInstance> {
    Construction::new(k, n, normed)?.with_machine(tm)?.build_start()
}

/// The control state `●word` or `word●`.
pub fn word_state(word: &[Basic], left: bool) -> ControlState {
    let p = word_pair(word);
    if left {
        p.left()
    } else {
        p.right()
    }
}
