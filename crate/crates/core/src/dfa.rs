//! Complete deterministic automata over an explicit stack alphabet.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::lts::StackSymbol;
use crate::regex::ClassRegex;

/// A complete DFA; `delta[q][i]` is the successor of `q` on `alphabet[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: IndexSet<StackSymbol>,
    initial: usize,
    finals: Vec<bool>,
    delta: Vec<Vec<usize>>,
}

impl Dfa {
    /// Builds a DFA from raw tables, checking completeness.
    pub fn from_parts(
        alphabet: IndexSet<StackSymbol>,
        initial: usize,
        finals: Vec<bool>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = finals.len();
        if initial >= n || delta.len() != n {
            return Err(Error::Invalid("DFA tables have inconsistent sizes".into()));
        }
        for row in &delta {
            if row.len() != alphabet.len() || row.iter().any(|&t| t >= n) {
                return Err(Error::Invalid("DFA transition table is not total".into()));
            }
        }
        Ok(Self {
            alphabet,
            initial,
            finals,
            delta,
        })
    }

    pub fn alphabet(&self) -> &IndexSet<StackSymbol> {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    /// Successor of `q` on the symbol with alphabet index `sym`.
    pub fn next(&self, q: usize, sym: usize) -> usize {
        self.delta[q][sym]
    }

    pub fn accepts(&self, word: &[StackSymbol]) -> Result<bool> {
        let mut q = self.initial;
        for s in word {
            let i = self
                .alphabet
                .get_index_of(s)
                .ok_or_else(|| Error::UnknownSymbol(s.to_string()))?;
            q = self.delta[q][i];
        }
        Ok(self.finals[q])
    }
}

struct Nfa {
    eps: Vec<Vec<usize>>,
    moves: Vec<Vec<(Vec<usize>, usize)>>,
}

impl Nfa {
    fn add(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.moves.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, r: &ClassRegex, alphabet: &IndexSet<StackSymbol>) -> (usize, usize) {
        match r {
            ClassRegex::Class(c) => {
                let (s, t) = (self.add(), self.add());
                let syms = c
                    .iter()
                    .map(|x| alphabet.get_index_of(x).expect("checked"))
                    .collect();
                self.moves[s].push((syms, t));
                (s, t)
            }
            ClassRegex::Concat(a, b) => {
                let (s1, t1) = self.build(a, alphabet);
                let (s2, t2) = self.build(b, alphabet);
                self.eps[t1].push(s2);
                (s1, t2)
            }
            ClassRegex::Union(a, b) => {
                let (s, t) = (self.add(), self.add());
                for part in [a, b] {
                    let (s1, t1) = self.build(part, alphabet);
                    self.eps[s].push(s1);
                    self.eps[t1].push(t);
                }
                (s, t)
            }
            ClassRegex::Star(a) => {
                let (s, t) = (self.add(), self.add());
                let (s1, t1) = self.build(a, alphabet);
                self.eps[s].extend([s1, t]);
                self.eps[t1].extend([s1, t]);
                (s, t)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut todo: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = todo.pop() {
            for &r in &self.eps[q] {
                if set.insert(r) {
                    todo.push(r);
                }
            }
        }
    }
}

/// The minimal complete DFA of `r` over `alphabet`, dead state included.
pub fn regex_to_min_dfa(r: &ClassRegex, alphabet: &IndexSet<StackSymbol>) -> Result<Dfa> {
    r.check_classes()?;
    if let Some(s) = r.symbols().into_iter().find(|s| !alphabet.contains(s)) {
        return Err(Error::UnknownSymbol(s.to_string()));
    }
    let mut nfa = Nfa {
        eps: Vec::new(),
        moves: Vec::new(),
    };
    let (start, accept) = nfa.build(r, alphabet);

    let mut init = BTreeSet::from([start]);
    nfa.closure(&mut init);
    let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    let mut sets = vec![init.clone()];
    ids.insert(init, 0);
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < sets.len() {
        let mut row = Vec::with_capacity(alphabet.len());
        for sym in 0..alphabet.len() {
            let mut next = BTreeSet::new();
            for &q in &sets[i] {
                for (syms, t) in &nfa.moves[q] {
                    if syms.contains(&sym) {
                        next.insert(*t);
                    }
                }
            }
            nfa.closure(&mut next);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    sets.push(next.clone());
                    ids.insert(next, sets.len() - 1);
                    sets.len() - 1
                }
            };
            row.push(id);
        }
        delta.push(row);
        i += 1;
    }
    let finals = sets.iter().map(|s| s.contains(&accept)).collect();
    Ok(minimize_dfa(&Dfa {
        alphabet: alphabet.clone(),
        initial: 0,
        finals,
        delta,
    }))
}

/// Hopcroft minimization followed by BFS renumbering from the initial state,
/// so language-equivalent minimal DFAs compare equal.
pub fn minimize_dfa(a: &Dfa) -> Dfa {
    let n = a.state_count();
    let k = a.alphabet.len();

    // Drop unreachable states first.
    let mut reach = vec![false; n];
    reach[a.initial] = true;
    let mut todo = vec![a.initial];
    while let Some(q) = todo.pop() {
        for &t in &a.delta[q] {
            if !reach[t] {
                reach[t] = true;
                todo.push(t);
            }
        }
    }

    let mut inverse: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; k];
    for q in (0..n).filter(|&q| reach[q]) {
        for (sym, &t) in a.delta[q].iter().enumerate() {
            inverse[sym][t].push(q);
        }
    }

    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for accepting in [true, false] {
        let members: Vec<usize> = (0..n)
            .filter(|&q| reach[q] && a.finals[q] == accepting)
            .collect();
        if !members.is_empty() {
            for &q in &members {
                block_of[q] = blocks.len();
            }
            blocks.push(members);
        }
    }

    let mut work: VecDeque<(usize, usize)> = VecDeque::new();
    let mut queued: BTreeSet<(usize, usize)> = BTreeSet::new();
    for b in 0..blocks.len() {
        for sym in 0..k {
            work.push_back((b, sym));
            queued.insert((b, sym));
        }
    }
    while let Some((splitter, sym)) = work.pop_front() {
        queued.remove(&(splitter, sym));
        let mut hit: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &t in &blocks[splitter] {
            for &q in &inverse[sym][t] {
                hit.entry(block_of[q]).or_default().push(q);
            }
        }
        for (b, mut inside) in hit {
            inside.sort_unstable();
            inside.dedup();
            if inside.len() == blocks[b].len() {
                continue;
            }
            let outside: Vec<usize> = blocks[b]
                .iter()
                .copied()
                .filter(|q| inside.binary_search(q).is_err())
                .collect();
            let (keep, moved) = if inside.len() <= outside.len() {
                (outside, inside)
            } else {
                (inside, outside)
            };
            let nb = blocks.len();
            for &q in &moved {
                block_of[q] = nb;
            }
            blocks[b] = keep;
            blocks.push(moved);
            // `moved` is the smaller half, so queueing it suffices whether
            // or not the parent block is still pending.
            for s in 0..k {
                if queued.insert((nb, s)) {
                    work.push_back((nb, s));
                }
            }
        }
    }

    // Canonical numbering by BFS over symbols in alphabet order.
    let mut order = vec![usize::MAX; blocks.len()];
    let mut reps = Vec::new();
    let start = block_of[a.initial];
    order[start] = 0;
    reps.push(blocks[start][0]);
    let mut i = 0;
    while i < reps.len() {
        let q = reps[i];
        for sym in 0..k {
            let b = block_of[a.delta[q][sym]];
            if order[b] == usize::MAX {
                order[b] = reps.len();
                reps.push(blocks[b][0]);
            }
        }
        i += 1;
    }
    Dfa {
        alphabet: a.alphabet.clone(),
        initial: 0,
        finals: reps.iter().map(|&q| a.finals[q]).collect(),
        delta: reps
            .iter()
            .map(|&q| a.delta[q].iter().map(|&t| order[block_of[t]]).collect())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet(levels: u32) -> IndexSet<StackSymbol> {
        (0..levels)
            .flat_map(|l| [StackSymbol::omega(false, l), StackSymbol::omega(true, l)])
            .collect()
    }

    fn all_words(alpha: &IndexSet<StackSymbol>, max_len: usize) -> Vec<Vec<StackSymbol>> {
        let mut out = vec![Vec::new()];
        let mut layer = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for s in alpha {
                    let mut v: Vec<StackSymbol> = w.clone();
                    v.push(s.clone());
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }

    /// Number of distinct residual languages, approximated by their
    /// restriction to suffixes of bounded length.
    fn residual_count(r: &ClassRegex, alpha: &IndexSet<StackSymbol>, len: usize) -> usize {
        let words = all_words(alpha, len);
        let suffixes = all_words(alpha, len);
        let mut seen = BTreeSet::new();
        for u in &words {
            let sig: Vec<bool> = suffixes
                .iter()
                .map(|v| {
                    let mut w = u.clone();
                    w.extend(v.iter().cloned());
                    r.matches(&w)
                })
                .collect();
            seen.insert(sig);
        }
        seen.len()
    }

    #[test]
    fn counter_shape_has_four_states() {
        let alpha = alphabet(3);
        let r = ClassRegex::parse("(O_0* O_1)* O_2").unwrap();
        let dfa = regex_to_min_dfa(&r, &alpha).unwrap();
        assert_eq!(dfa.state_count(), 4);
        assert_eq!(residual_count(&r, &alpha, 3), 4);
    }

    #[test]
    fn single_class_has_three_states() {
        let alpha: IndexSet<StackSymbol> = ["x", "y", "z"]
            .into_iter()
            .map(|s| StackSymbol::new(s).unwrap())
            .collect();
        let r = ClassRegex::parse("[x y z]").unwrap();
        let dfa = regex_to_min_dfa(&r, &alpha).unwrap();
        assert_eq!(dfa.state_count(), 3);
        assert_eq!(residual_count(&r, &alpha, 3), 3);
    }

    #[test]
    fn star_then_class_has_three_states() {
        let alpha = alphabet(2);
        let r = ClassRegex::parse("O_0* O_1").unwrap();
        assert_eq!(regex_to_min_dfa(&r, &alpha).unwrap().state_count(), 3);
        assert_eq!(residual_count(&r, &alpha, 3), 3);
    }

    #[test]
    fn minimization_is_idempotent() {
        let alpha = alphabet(3);
        let r = ClassRegex::parse("(O_0* O_1)* O_2").unwrap();
        let d = regex_to_min_dfa(&r, &alpha).unwrap();
        assert_eq!(minimize_dfa(&d), d);
    }

    #[test]
    fn equivalent_states_are_merged() {
        let alpha: IndexSet<StackSymbol> = [StackSymbol::new("x").unwrap()].into_iter().collect();
        // 0 -x-> 1 -x-> 2 -x-> 2, with 1 and 2 both accepting.
        let d = Dfa::from_parts(alpha, 0, vec![false, true, true], vec![vec![1], vec![2], vec![2]])
            .unwrap();
        let m = minimize_dfa(&d);
        assert_eq!(m.state_count(), 2);
        for n in 0..5 {
            let w = vec![StackSymbol::new("x").unwrap(); n];
            assert_eq!(d.accepts(&w).unwrap(), m.accepts(&w).unwrap());
        }
    }

    #[test]
    fn unminimized_product_agrees_up_to_length_five() {
        let alpha = alphabet(3);
        let r = ClassRegex::parse("(O_0* O_1)* O_2").unwrap();
        let min = regex_to_min_dfa(&r, &alpha).unwrap();
        for w in all_words(&alpha, 5) {
            assert_eq!(min.accepts(&w).unwrap(), r.matches(&w));
        }
    }

    #[test]
    fn errors() {
        let alpha = alphabet(1);
        let r = ClassRegex::Class(BTreeSet::new());
        assert_eq!(regex_to_min_dfa(&r, &alpha), Err(Error::EmptyClass));
        let r = ClassRegex::omega(4);
        assert!(matches!(
            regex_to_min_dfa(&r, &alpha),
            Err(Error::UnknownSymbol(_))
        ));
    }
}
