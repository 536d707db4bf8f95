//! Normedness: every reachable configuration can reach an empty-stack
//! deadlock.
//!
//! Configurations `(p, w)` are handled as words `w⊥` read from `p` by
//! automata whose initial states are the control states. The configurations
//! that can reach an empty-stack deadlock form the regular set `pre*(T)`;
//! the reachable ones form `post*(root)`. The root is normed iff the second
//! set is included in the first.

use std::collections::VecDeque;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::explore::{explore, DEFAULT_NODE_BUDGET};
use crate::lts::{Config, Pda};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normedness {
    Normed,
    /// A reachable configuration with no path to an empty-stack deadlock.
    NotNormed { witness: Config },
    /// The inclusion check ran out of budget.
    Unknown,
}

/// An automaton over `Γ ∪ {⊥}` with transitions kept per source state.
#[derive(Default)]
struct Automaton {
    out: Vec<Vec<(u32, u32)>>,
    seen: FxHashSet<(u32, u32, u32)>,
}

impl Automaton {
    fn with_states(n: usize) -> Self {
        Self {
            out: vec![Vec::new(); n],
            seen: FxHashSet::default(),
        }
    }

    fn ensure(&mut self, s: u32) {
        if self.out.len() <= s as usize {
            self.out.resize(s as usize + 1, Vec::new());
        }
    }

    fn insert(&mut self, t: (u32, u32, u32)) -> bool {
        if !self.seen.insert(t) {
            return false;
        }
        self.ensure(t.0.max(t.2));
        self.out[t.0 as usize].push((t.1, t.2));
        true
    }
}

/// Rule tables indexed by target, for backward saturation.
struct Backward {
    internal_into: Vec<Vec<u32>>,
    push_into: FxHashMap<(u32, u32), Vec<u32>>,
}

/// `pre*` of the empty-stack deadlocks; automaton state `n` is final.
fn pre_star(pda: &Pda) -> Automaton {
    let n = pda.states().len();
    let final_state = n as u32;
    let bottom = pda.stack_alphabet().len() as u32;
    let compiled = pda.compiled();
    let mut back = Backward {
        internal_into: vec![Vec::new(); n],
        push_into: FxHashMap::default(),
    };
    let mut work: Vec<(u32, u32, u32)> = Vec::new();
    for (p, rules) in compiled.iter().enumerate() {
        let p = p as u32;
        for &(_, q) in &rules.internal {
            back.internal_into[q as usize].push(p);
        }
        for &(_, q, s) in &rules.push {
            back.push_into.entry((q, s)).or_default().push(p);
        }
        for &(s, _, q) in &rules.pop {
            work.push((p, s, q));
        }
        if rules.internal.is_empty() && rules.push.is_empty() {
            work.push((p, bottom, final_state));
        }
    }
    let mut aut = Automaton::with_states(n + 1);
    // virtual[q'] lists p with an implied internal move p ⇒ q'.
    let mut virtual_into: FxHashMap<u32, Vec<u32>> = FxHashMap::default();
    let mut virtual_seen: FxHashSet<(u32, u32)> = FxHashSet::default();
    while let Some(t) = work.pop() {
        if !aut.insert(t) {
            continue;
        }
        let (q, g, q2) = t;
        if (q as usize) < n {
            for &p in &back.internal_into[q as usize] {
                work.push((p, g, q2));
            }
            if let Some(ps) = back.push_into.get(&(q, g)) {
                for &p in ps {
                    if virtual_seen.insert((p, q2)) {
                        virtual_into.entry(q2).or_default().push(p);
                        aut.ensure(q2);
                        for &(g2, q3) in &aut.out[q2 as usize] {
                            work.push((p, g2, q3));
                        }
                    }
                }
            }
        }
        if let Some(ps) = virtual_into.get(&q) {
            for &p in ps {
                work.push((p, g, q2));
            }
        }
    }
    aut
}

/// `post*` of the root. Returns the automaton, its ε-moves from control
/// states, and its final state.
fn post_star(pda: &Pda, root: &Config) -> (Automaton, Vec<Vec<u32>>, u32) {
    let n = pda.states().len() as u32;
    let bottom = pda.stack_alphabet().len() as u32;
    let compiled = pda.compiled();
    let mut next_state = n;
    let mut fresh = || {
        next_state += 1;
        next_state - 1
    };
    let mut aut = Automaton::with_states(n as usize);
    let mut work: Vec<(u32, u32, u32)> = Vec::new();

    let p0 = pda.state_index(&root.state).expect("checked");
    let mut word: Vec<u32> = root
        .stack
        .iter()
        .map(|s| pda.symbol_index(s).expect("checked"))
        .collect();
    word.push(bottom);
    let mut cur = p0;
    let mut final_state = 0;
    for (i, &g) in word.iter().enumerate() {
        let next = fresh();
        if i == 0 {
            work.push((cur, g, next));
        } else {
            aut.insert((cur, g, next));
        }
        cur = next;
        final_state = next;
    }

    let mut mids: FxHashMap<(u32, u32), u32> = FxHashMap::default();
    let mut eps: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
    let mut eps_seen: FxHashSet<(u32, u32)> = FxHashSet::default();
    // eps_into[s] lists control states p with p -ε-> s.
    let mut eps_into: FxHashMap<u32, Vec<u32>> = FxHashMap::default();

    loop {
        let Some((p, g, q)) = work.pop() else { break };
        if !aut.insert((p, g, q)) {
            continue;
        }
        if p >= n {
            if let Some(ps) = eps_into.get(&p) {
                for &p2 in ps {
                    work.push((p2, g, q));
                }
            }
            continue;
        }
        let rules = &compiled[p as usize];
        for &(_, t) in &rules.internal {
            work.push((t, g, q));
        }
        for &(_, t, s) in &rules.push {
            let m = *mids.entry((t, s)).or_insert_with(&mut fresh);
            work.push((t, s, m));
            // (m, g, q) is a non-control transition; propagate through ε.
            work.push((m, g, q));
        }
        if g != bottom {
            for (_, t) in rules.pops_of(g) {
                if eps_seen.insert((t, q)) {
                    eps[t as usize].push(q);
                    eps_into.entry(q).or_default().push(t);
                    aut.ensure(q);
                    for &(g2, q2) in &aut.out[q as usize].clone() {
                        work.push((t, g2, q2));
                    }
                }
            }
        }
    }
    (aut, eps, final_state)
}

/// Searches `post*(root) ∖ pre*(T)` for a configuration.
fn inclusion_witness(pda: &Pda, root: &Config, budget: usize) -> Option<Option<Config>> {
    let n = pda.states().len() as u32;
    let bottom = pda.stack_alphabet().len() as u32;
    let pre = pre_star(pda);
    let pre_final = n;
    let (post, post_eps, post_final) = post_star(pda, root);

    let mut subsets: Vec<Vec<u32>> = Vec::new();
    let mut subset_ids: FxHashMap<Vec<u32>, u32> = FxHashMap::default();
    let mut intern = |s: Vec<u32>, subsets: &mut Vec<Vec<u32>>| -> u32 {
        if let Some(&id) = subset_ids.get(&s) {
            return id;
        }
        subsets.push(s.clone());
        subset_ids.insert(s, (subsets.len() - 1) as u32);
        (subsets.len() - 1) as u32
    };
    let mut step_cache: FxHashMap<(u32, u32), u32> = FxHashMap::default();

    // Node: (post state, pre subset); parent pointer and symbol read.
    let mut nodes: Vec<(u32, u32)> = Vec::new();
    let mut parent: Vec<(u32, u32)> = Vec::new();
    let mut index: FxHashMap<(u32, u32), u32> = FxHashMap::default();
    let mut queue = VecDeque::new();
    for p in 0..n {
        let s = intern(vec![p], &mut subsets);
        index.insert((p, s), nodes.len() as u32);
        nodes.push((p, s));
        parent.push((u32::MAX, u32::MAX));
        queue.push_back(nodes.len() as u32 - 1);
    }
    const EPS: u32 = u32::MAX - 1;
    while let Some(id) = queue.pop_front() {
        if nodes.len() > budget {
            return None;
        }
        let (s, set) = nodes[id as usize];
        let mut moves: Vec<(u32, u32, u32)> = Vec::new();
        if s < n {
            for &t in &post_eps[s as usize] {
                moves.push((EPS, t, set));
            }
        }
        if let Some(out) = post.out.get(s as usize) {
            for &(g, t) in out {
                let next_set = *step_cache.entry((set, g)).or_insert_with(|| {
                    let mut v: Vec<u32> = subsets[set as usize]
                        .iter()
                        .flat_map(|&x| {
                            pre.out
                                .get(x as usize)
                                .into_iter()
                                .flatten()
                                .filter(|e| e.0 == g)
                                .map(|e| e.1)
                        })
                        .collect();
                    v.sort_unstable();
                    v.dedup();
                    intern(v, &mut subsets)
                });
                moves.push((g, t, next_set));
            }
        }
        for (g, t, next_set) in moves {
            if index.contains_key(&(t, next_set)) {
                continue;
            }
            let nid = nodes.len() as u32;
            index.insert((t, next_set), nid);
            nodes.push((t, next_set));
            parent.push((id, g));
            if t == post_final && g == bottom && !subsets[next_set as usize].contains(&pre_final) {
                // Rebuild the word from the parent chain.
                let mut syms = Vec::new();
                let mut cur = nid;
                let mut start = 0;
                while parent[cur as usize].0 != u32::MAX {
                    let (pid, sym) = parent[cur as usize];
                    if sym != EPS && sym != bottom {
                        syms.push(sym);
                    }
                    cur = pid;
                    start = nodes[cur as usize].0;
                }
                syms.reverse();
                let stack = syms.iter().map(|&x| pda.symbol_at(x).clone()).collect();
                return Some(Some(Config::new(pda.state_at(start).clone(), stack)));
            }
            queue.push_back(nid);
        }
    }
    Some(None)
}

/// Decides whether every configuration reachable from `root` can reach an
/// empty-stack deadlock.
///
/// The fragment with stacks up to `stack_cap` is searched first for a
/// reachable deadlock with a nonempty stack; the full answer comes from the
/// automata inclusion check.
pub fn check_normed(pda: &Pda, root: &Config, stack_cap: usize) -> Result<Normedness> {
    check_normed_with_budget(pda, root, stack_cap, DEFAULT_NODE_BUDGET)
}

pub fn check_normed_with_budget(
    pda: &Pda,
    root: &Config,
    stack_cap: usize,
    budget: usize,
) -> Result<Normedness> {
    pda.check_config(root)?;
    let cap = u32::try_from(stack_cap).unwrap_or(u32::MAX - 1);
    match explore(pda, std::slice::from_ref(root), cap, budget) {
        Ok(g) => {
            for c in 0..g.len() as u32 {
                let (_, st) = g.configs[c as usize];
                if g.successors(c).is_empty() && !g.boundary[c as usize] && st != g.arena.empty() {
                    return Ok(Normedness::NotNormed {
                        witness: g.config(pda, c),
                    });
                }
            }
        }
        Err(Error::Budget { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(match inclusion_witness(pda, root, budget) {
        None => Normedness::Unknown,
        Some(None) => Normedness::Normed,
        Some(Some(witness)) => Normedness::NotNormed { witness },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{ActionLabel, ControlState, PdaBuilder, Rule, StackSymbol};

    fn st(s: &str) -> ControlState {
        ControlState::parse(s).unwrap()
    }

    fn sym(s: &str) -> StackSymbol {
        StackSymbol::new(s).unwrap()
    }

    fn a(s: &str) -> ActionLabel {
        ActionLabel::new(s).unwrap()
    }

    #[test]
    fn pop_all_is_normed() {
        let mut b = PdaBuilder::new();
        for s in ["x", "y"] {
            b.add_rule(Rule::pop(st("popAll"), sym(s), a("a"), st("popAll")));
        }
        let pda = b.build();
        let root = Config::parse("popAll | x y x").unwrap();
        assert_eq!(check_normed(&pda, &root, 8).unwrap(), Normedness::Normed);
    }

    #[test]
    fn stuck_nonempty_stack_is_not_normed() {
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::internal(st("p"), a("a"), st("stop")));
        b.declare_symbol(sym("x"));
        let pda = b.build();
        let root = Config::parse("p | x").unwrap();
        assert_eq!(
            check_normed(&pda, &root, 4).unwrap(),
            Normedness::NotNormed {
                witness: Config::parse("stop | x").unwrap()
            }
        );
    }

    #[test]
    fn empty_deadlock_is_normed() {
        let mut b = PdaBuilder::new();
        b.declare_state(st("d"));
        let pda = b.build();
        assert_eq!(
            check_normed(&pda, &Config::parse("d").unwrap(), 0).unwrap(),
            Normedness::Normed
        );
    }

    #[test]
    fn non_deadlock_trap_is_found() {
        // q can always drain its stack through q2, but may also enter a
        // loop that never touches the stack.
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::push(st("q"), a("a"), st("q"), sym("x")));
        b.add_rule(Rule::internal(st("q"), a("c"), st("q2")));
        b.add_rule(Rule::pop(st("q2"), sym("x"), a("b"), st("q2")));
        b.add_rule(Rule::push(st("q"), a("d"), st("trap"), sym("x")));
        b.add_rule(Rule::internal(st("trap"), a("a"), st("trap")));
        let pda = b.build();
        match check_normed(&pda, &Config::parse("q").unwrap(), 2).unwrap() {
            Normedness::NotNormed { witness } => assert_eq!(witness.state, st("trap")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infinite_but_normed() {
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::push(st("q"), a("a"), st("q"), sym("x")));
        b.add_rule(Rule::pop(st("q"), sym("x"), a("b"), st("q2")));
        b.add_rule(Rule::pop(st("q2"), sym("x"), a("b"), st("q2")));
        b.add_rule(Rule::internal(st("q"), a("c"), st("q2")));
        let pda = b.build();
        assert_eq!(
            check_normed(&pda, &Config::parse("q").unwrap(), 3).unwrap(),
            Normedness::Normed
        );
    }

    /// Explicit check on a closed fragment: every reachable configuration
    /// reaches an empty-stack deadlock.
    fn explicit(pda: &Pda, root: &Config) -> Option<bool> {
        let g = explore(pda, std::slice::from_ref(root), 6, 100_000).ok()?;
        if !g.closed() {
            return None;
        }
        let n = g.len();
        let mut good: Vec<bool> = (0..n as u32)
            .map(|c| g.successors(c).is_empty() && g.configs[c as usize].1 == g.arena.empty())
            .collect();
        loop {
            let mut changed = false;
            for c in 0..n as u32 {
                if !good[c as usize] && g.successors(c).iter().any(|&(_, t)| good[t as usize]) {
                    good[c as usize] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Some(good.iter().all(|&x| x))
    }

    #[test]
    fn agrees_with_explicit_search() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let names = ["p", "q", "r", "s"];
        let syms = ["x", "y"];
        let mut compared = 0;
        for _ in 0..400 {
            let mut b = PdaBuilder::new();
            for n in names {
                b.declare_state(st(n));
            }
            for s in syms {
                b.declare_symbol(sym(s));
            }
            for _ in 0..rng.gen_range(1..8) {
                let src = st(names[rng.gen_range(0..4)]);
                let dst = st(names[rng.gen_range(0..4)]);
                let s = sym(syms[rng.gen_range(0..2)]);
                let rule = match rng.gen_range(0..5) {
                    0 => Rule::internal(src, a("a"), dst),
                    1 => Rule::push(src, a("b"), dst, s),
                    _ => Rule::pop(src, s, a("c"), dst),
                };
                b.add_rule(rule);
            }
            let pda = b.build();
            let root = Config::parse("p | x y").unwrap();
            let Some(expected) = explicit(&pda, &root) else {
                continue;
            };
            compared += 1;
            let got = check_normed(&pda, &root, 6).unwrap();
            assert_eq!(got == Normedness::Normed, expected, "{:?}", pda.rules());
            if let Normedness::NotNormed { witness } = got {
                let r = crate::explore::reachable(&pda, &[root.clone()], 6).unwrap();
                assert!(r.configs.contains(&witness));
            }
        }
        assert!(compared > 100);
    }
}
