//! Transducer machines: a word steps to the unique `z′` with `T1(z) = T2(z′)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::transducer::Transducer;

/// Largest `ℓ` for which successors are enumerated.
pub const MAX_ENUMERATION_ELL: usize = 20;

/// A triple `(ℓ, T1, T2)` of letter-to-letter transducers over `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransducerMachine {
    ell: usize,
    t1: Transducer,
    t2: Transducer,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    DeadEnd,
    /// The word at this index has two or more successors.
    NonUniqueSuccessor { step: usize },
    StepBudget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineRun {
    pub trace: Vec<Vec<bool>>,
    pub status: RunStatus,
}

impl MachineRun {
    pub fn last(&self) -> &[bool] {
        self.trace.last().expect("trace starts at 1^ℓ")
    }

    /// Terminated at a dead end equal to `0^ℓ`.
    pub fn ends_in_zero(&self) -> bool {
        self.status == RunStatus::DeadEnd && self.last().iter().all(|&b| !b)
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DeadEnd => write!(f, "dead-end"),
            Self::NonUniqueSuccessor { step } => write!(f, "non-unique-successor({step})"),
            Self::StepBudget => write!(f, "step-budget"),
        }
    }
}

/// Renders a bit word as `0`/`1` characters.
pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn binary_inputs(t: &Transducer, name: &str) -> Result<[usize; 2]> {
    let ins = t.inputs();
    match (ins.get_index_of("0"), ins.get_index_of("1")) {
        (Some(z), Some(o)) if ins.len() == 2 => Ok([z, o]),
        _ => Err(Error::Invalid(format!("{name} must have inputs exactly `0 1`"))),
    }
}

impl TransducerMachine {
    pub fn new(ell: usize, t1: Transducer, t2: Transducer) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Invalid("ell must be at least 1".into()));
        }
        for (t, name) in [(&t1, "T1"), (&t2, "T2")] {
            if !t.is_letter_to_letter() {
                return Err(Error::NotLetterToLetter(name.into()));
            }
            binary_inputs(t, name)?;
        }
        Ok(Self { ell, t1, t2 })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn t1(&self) -> &Transducer {
        &self.t1
    }

    pub fn t2(&self) -> &Transducer {
        &self.t2
    }

    fn check_bound(&self) -> Result<()> {
        if self.ell > MAX_ENUMERATION_ELL {
            return Err(Error::EnumerationBound {
                ell: self.ell as u64,
                max: MAX_ENUMERATION_ELL as u64,
            });
        }
        Ok(())
    }

    /// `T1(z)` as output names.
    pub fn image(&self, z: &[bool]) -> Vec<String> {
        let [zero, one] = binary_inputs(&self.t1, "T1").expect("validated");
        let idx: Vec<usize> = z.iter().map(|&b| if b { one } else { zero }).collect();
        self.t1
            .run_indices(&idx)
            .into_iter()
            .map(|o| self.t1.outputs()[o].clone())
            .collect()
    }

    /// Up to `limit` words `z′` with `T2(z′) = T1(z)`, in lexicographic order.
    pub fn successors(&self, z: &[bool], limit: usize) -> Result<Vec<Vec<bool>>> {
        self.check_bound()?;
        let target: Option<Vec<usize>> = self
            .image(z)
            .iter()
            .map(|o| self.t2.outputs().get_index_of(o.as_str()))
            .collect();
        let Some(target) = target else {
            return Ok(Vec::new());
        };
        let inputs = binary_inputs(&self.t2, "T2").expect("validated");
        let mut found = Vec::new();
        let mut prefix = Vec::with_capacity(self.ell);
        self.search(self.t2.initial(), &target, inputs, &mut prefix, &mut found, limit);
        Ok(found)
    }

    fn search(
        &self,
        q: usize,
        target: &[usize],
        inputs: [usize; 2],
        prefix: &mut Vec<bool>,
        found: &mut Vec<Vec<bool>>,
        limit: usize,
    ) {
        if found.len() >= limit {
            return;
        }
        let i = prefix.len();
        if i == target.len() {
            found.push(prefix.clone());
            return;
        }
        for bit in [false, true] {
            let (r, out) = self.t2.transition(q, inputs[usize::from(bit)]);
            if out == [target[i]] {
                prefix.push(bit);
                self.search(r, target, inputs, prefix, found, limit);
                prefix.pop();
            }
        }
    }

    /// Whether `0^ℓ` has no successor.
    pub fn zero_is_dead_end(&self) -> Result<bool> {
        Ok(self.successors(&vec![false; self.ell], 1)?.is_empty())
    }

    /// Parses `ell: N` followed by `T1:` and `T2:` transducer blocks.
    pub fn parse(text: &str) -> Result<Self> {
        let mut ell: Option<usize> = None;
        let mut blocks: [Option<(usize, String)>; 2] = [None, None];
        let mut current: Option<usize> = None;
        for (n, line) in text.lines().enumerate() {
            let t = line.trim();
            let perr = |message: String| Error::Parse {
                line: n + 1,
                col: 1,
                message,
            };
            match t {
                "T1:" | "T2:" => {
                    let i = usize::from(t == "T2:");
                    if blocks[i].is_some() {
                        return Err(perr(format!("duplicate `{t}` block")));
                    }
                    blocks[i] = Some((n + 1, String::new()));
                    current = Some(i);
                }
                _ => match current {
                    Some(i) => {
                        let block = &mut blocks[i].as_mut().expect("opened").1;
                        block.push_str(line);
                        block.push('\n');
                    }
                    None if t.is_empty() || t.starts_with('#') => {}
                    None => {
                        let v = t
                            .strip_prefix("ell:")
                            .ok_or_else(|| perr("expected `ell: <int>`".into()))?;
                        ell = Some(
                            v.trim()
                                .parse()
                                .map_err(|_| perr(format!("bad length `{}`", v.trim())))?,
                        );
                    }
                },
            }
        }
        let ell = ell.ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            message: "missing `ell:` line".into(),
        })?;
        let mut ts = Vec::new();
        for (i, b) in blocks.into_iter().enumerate() {
            let (start, body) = b.ok_or_else(|| Error::Parse {
                line: text.lines().count().max(1),
                col: 1,
                message: format!("missing `T{}:` block", i + 1),
            })?;
            ts.push(Transducer::parse(&body).map_err(|e| match e {
                Error::Parse { line, col, message } => Error::Parse {
                    line: line + start,
                    col,
                    message,
                },
                other => other,
            })?);
        }
        let t2 = ts.pop().expect("two blocks");
        let t1 = ts.pop().expect("two blocks");
        Self::new(ell, t1, t2)
    }

    /// Renders the machine file format; `parse` reproduces `self`.
    pub fn emit(&self) -> String {
        format!("ell: {}\nT1:\n{}T2:\n{}", self.ell, self.t1.emit(), self.t2.emit())
    }
}

/// Runs `tm` from `1^ℓ` for at most `max_steps` steps.
pub fn simulate_machine(tm: &TransducerMachine, max_steps: usize) -> Result<MachineRun> {
    tm.check_bound()?;
    let mut trace = vec![vec![true; tm.ell]];
    let status = loop {
        let z = trace.last().expect("nonempty");
        let next = tm.successors(z, 2)?;
        match next.len() {
            0 => break RunStatus::DeadEnd,
            1 if trace.len() > max_steps => break RunStatus::StepBudget,
            1 => trace.push(next.into_iter().next().expect("one")),
            _ => {
                break RunStatus::NonUniqueSuccessor {
                    step: trace.len() - 1,
                }
            }
        }
    };
    Ok(MachineRun { trace, status })
}

/// Whether `0^ℓ` is a dead end of `tm`.
pub fn check_zero_dead_end(tm: &TransducerMachine) -> Result<bool> {
    tm.zero_is_dead_end()
}

/// A machine with stateless transducers given by the images of `0` and `1`.
pub fn stateless_machine(ell: usize, t1: [&str; 2], t2: [&str; 2]) -> Result<TransducerMachine> {
    let make = |img: [&str; 2]| {
        let mut outs = img.to_vec();
        outs.sort_unstable();
        outs.dedup();
        Transducer::new(
            &["q"],
            "q",
            &["0", "1"],
            &outs,
            [("q", "0", "q", vec![img[0]]), ("q", "1", "q", vec![img[1]])],
        )
    };
    TransducerMachine::new(ell, make(t1)?, make(t2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Successors by enumerating all `2^ℓ` candidates.
    fn brute(tm: &TransducerMachine, z: &[bool]) -> Vec<Vec<bool>> {
        let img = tm.image(z);
        let mut found = (0..1u32 << tm.ell())
            .map(|v| (0..tm.ell()).map(|i| v >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|c| {
                let [zero, one] = binary_inputs(tm.t2(), "T2").unwrap();
                let idx: Vec<usize> = c.iter().map(|&b| if b { one } else { zero }).collect();
                let out: Vec<String> = tm
                    .t2()
                    .run_indices(&idx)
                    .into_iter()
                    .map(|o| tm.t2().outputs()[o].clone())
                    .collect();
                out == img
            })
            .collect::<Vec<_>>();
        found.sort();
        found
    }

    #[test]
    fn bisimilar_toy_run() {
        let tm = stateless_machine(2, ["x", "p"], ["p", "y"]).unwrap();
        let run = simulate_machine(&tm, 10).unwrap();
        assert_eq!(run.trace, vec![vec![true, true], vec![false, false]]);
        assert_eq!(run.status, RunStatus::DeadEnd);
        assert!(run.ends_in_zero());
        assert!(check_zero_dead_end(&tm).unwrap());
    }

    #[test]
    fn non_bisimilar_toy_run() {
        let tm = stateless_machine(2, ["q", "p"], ["z", "z"]).unwrap();
        let run = simulate_machine(&tm, 10).unwrap();
        assert_eq!(run.trace, vec![vec![true, true]]);
        assert_eq!(run.status, RunStatus::DeadEnd);
        assert!(!run.ends_in_zero());
        assert!(check_zero_dead_end(&tm).unwrap());
    }

    #[test]
    fn constant_machine_is_not_unique() {
        let tm = stateless_machine(3, ["c", "c"], ["c", "c"]).unwrap();
        let run = simulate_machine(&tm, 10).unwrap();
        assert_eq!(run.status, RunStatus::NonUniqueSuccessor { step: 0 });
    }

    #[test]
    fn identity_machine_zero_not_dead() {
        let tm = stateless_machine(3, ["u", "v"], ["u", "v"]).unwrap();
        assert!(!check_zero_dead_end(&tm).unwrap());
        let run = simulate_machine(&tm, 5).unwrap();
        assert_eq!(run.status, RunStatus::StepBudget);
        assert_eq!(run.trace.len(), 6);
    }

    #[test]
    fn enumeration_bound() {
        let tm = stateless_machine(21, ["u", "v"], ["u", "v"]).unwrap();
        assert!(matches!(
            simulate_machine(&tm, 1),
            Err(Error::EnumerationBound { ell: 21, max: 20 })
        ));
    }

    #[test]
    fn rejects_non_binary_inputs() {
        let t = Transducer::new(&["q"], "q", &["0"], &["u"], [("q", "0", "q", vec!["u"])]).unwrap();
        assert!(TransducerMachine::new(2, t.clone(), t).is_err());
    }

    #[test]
    fn pruned_search_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let outs = ["u", "v", "w"];
        for _ in 0..200 {
            let random = |rng: &mut rand_chacha::ChaCha8Rng| {
                let states = ["s", "t"];
                let entries: Vec<(&str, &str, &str, Vec<&str>)> = states
                    .iter()
                    .flat_map(|q| ["0", "1"].map(|a| (*q, a)))
                    .map(|(q, a)| (q, a, states[rng.gen_range(0..2)], vec![outs[rng.gen_range(0..3)]]))
                    .collect();
                Transducer::new(&states, "s", &["0", "1"], &outs, entries).unwrap()
            };
            let ell = rng.gen_range(1..7);
            let tm = TransducerMachine::new(ell, random(&mut rng), random(&mut rng)).unwrap();
            let z: Vec<bool> = (0..ell).map(|_| rng.gen()).collect();
            assert_eq!(tm.successors(&z, usize::MAX).unwrap(), brute(&tm, &z));
        }
    }

    #[test]
    fn file_round_trip() {
        let tm = stateless_machine(2, ["x", "p"], ["p", "y"]).unwrap();
        let back = TransducerMachine::parse(&tm.emit()).unwrap();
        assert_eq!(back, tm);
    }
}
