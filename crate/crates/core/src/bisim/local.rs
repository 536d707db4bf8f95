//! On-the-fly solving of the bisimulation game from one pair of
//! configurations, without building the configuration graph up front.
//!
//! The solver searches Attacker's moves and Defender's replies depth first.
//! A pair met again on the current path is assumed bisimilar; results that
//! lean on such an assumption are kept pending until the assumed pair is
//! settled. Pairs involving a configuration above the stack cap are left
//! undecided. Exact ranks come from a separate memoized minimax over
//! bounded rounds.

use rustc_hash::FxHashMap;

use crate::explore::StackArena;
use crate::lts::{Config, Pda};

use super::{AttackerMove, Side};

/// Lazily expanded configuration graph with hash-consed stacks.
pub(crate) struct Game<'a> {
    pda: &'a Pda,
    arena: StackArena,
    ids: FxHashMap<(u32, u32), u32>,
    configs: Vec<(u32, u32)>,
    succ: Vec<Option<Box<[(u32, u32)]>>>,
}

impl<'a> Game<'a> {
    pub fn new(pda: &'a Pda) -> Self {
        Self {
            pda,
            arena: StackArena::default(),
            ids: FxHashMap::default(),
            configs: Vec::new(),
            succ: Vec::new(),
        }
    }

    pub fn intern(&mut self, c: &Config) -> u32 {
        let state = self.pda.state_index(&c.state).expect("checked");
        let word: Vec<u32> = c
            .stack
            .iter()
            .map(|s| self.pda.symbol_index(s).expect("checked"))
            .collect();
        let stack = self.arena.intern(&word);
        self.node(state, stack)
    }

    fn node(&mut self, state: u32, stack: u32) -> u32 {
        if let Some(&id) = self.ids.get(&(state, stack)) {
            return id;
        }
        let id = self.configs.len() as u32;
        self.configs.push((state, stack));
        self.succ.push(None);
        self.ids.insert((state, stack), id);
        id
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn height(&self, c: u32) -> u32 {
        self.arena.height(self.configs[c as usize].1)
    }

    /// Successors as `(action, config)`, sorted by action; pops first.
    pub fn successors(&mut self, c: u32) -> &[(u32, u32)] {
        if self.succ[c as usize].is_none() {
            let (state, stack) = self.configs[c as usize];
            let rules = &self.pda.compiled()[state as usize];
            let mut out: Vec<(u32, u32, u8)> = Vec::new();
            if let Some(top) = self.arena.top(stack) {
                let below = self.arena.below(stack);
                let pops: Vec<(u32, u32)> = rules.pops_of(top).collect();
                for (a, t) in pops {
                    out.push((a, self.node(t, below), 0));
                }
            }
            for &(a, t) in &rules.internal {
                out.push((a, self.node(t, stack), 1));
            }
            for &(a, t, s) in &rules.push {
                let pushed = self.arena.push(s, stack);
                out.push((a, self.node(t, pushed), 2));
            }
            out.sort_unstable_by_key(|&(a, t, kind)| (kind, a, t));
            out.dedup();
            self.succ[c as usize] = Some(out.into_iter().map(|(a, t, _)| (a, t)).collect());
        }
        self.succ[c as usize].as_deref().expect("filled")
    }

    /// Attacker's moves from `(c, d)` with Defender's matching replies.
    /// Each entry is `(side, action, attacker target, replies)`.
    fn moves(&mut self, (c, d): (u32, u32)) -> Vec<(Side, u32, u32, Vec<u32>)> {
        let sc = self.successors(c).to_vec();
        let sd = self.successors(d).to_vec();
        let replies = |a: u32, from: &[(u32, u32)], target: u32| {
            let mut ys: Vec<u32> = from.iter().filter(|e| e.0 == a).map(|e| e.1).collect();
            // A copycat reply ends the game at once.
            if let Some(i) = ys.iter().position(|&y| y == target) {
                ys.swap(0, i);
            }
            ys
        };
        let mut out = Vec::with_capacity(sc.len() + sd.len());
        for &(a, x) in &sc {
            out.push((Side::Left, a, x, replies(a, &sd, x)));
        }
        for &(a, y) in &sd {
            out.push((Side::Right, a, y, replies(a, &sc, y)));
        }
        out
    }

    pub fn pda(&self) -> &Pda {
        self.pda
    }
}

fn norm(c: u32, d: u32) -> (u32, u32) {
    if c <= d {
        (c, d)
    } else {
        (d, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    True,
    /// Attacker wins; the payload bounds the rank from above.
    False(u32),
    Unknown,
}

pub(crate) struct SolveStats {
    pub outcome: Outcome,
    /// Pairs shown bisimilar, excluding identical pairs.
    pub relation: u64,
    pub budget_hit: bool,
}

const NONE: usize = usize::MAX;

struct Solver<'g, 'a> {
    game: &'g mut Game<'a>,
    cap: u32,
    budget: usize,
    visits: usize,
    cache: FxHashMap<(u32, u32), Outcome>,
    on_path: FxHashMap<(u32, u32), usize>,
    pending: Vec<(u32, u32)>,
    budget_hit: bool,
}

impl Solver<'_, '_> {
    fn solve(&mut self, p: (u32, u32), depth: usize) -> (Outcome, usize) {
        if p.0 == p.1 {
            return (Outcome::True, NONE);
        }
        if let Some(&r) = self.cache.get(&p) {
            return (r, NONE);
        }
        if let Some(&d) = self.on_path.get(&p) {
            return (Outcome::True, d);
        }
        if self.game.height(p.0) > self.cap || self.game.height(p.1) > self.cap {
            return (Outcome::Unknown, NONE);
        }
        self.visits += 1;
        if self.visits > self.budget {
            self.budget_hit = true;
            return (Outcome::Unknown, NONE);
        }
        self.on_path.insert(p, depth);
        let mark = self.pending.len();
        let mut low = NONE;
        let mut unknown = false;
        let mut result = None;
        for (_, _, x, replies) in self.game.moves(p) {
            if replies.is_empty() {
                result = Some(Outcome::False(1));
                break;
            }
            let mut defended = false;
            let mut worst = 0;
            let mut open = false;
            for y in replies {
                let (r, l) = self.solve(norm(x, y), depth + 1);
                low = low.min(l);
                match r {
                    Outcome::True => {
                        defended = true;
                        break;
                    }
                    Outcome::False(k) => worst = worst.max(k),
                    Outcome::Unknown => open = true,
                }
            }
            if defended {
                continue;
            }
            if open {
                unknown = true;
            } else {
                result = Some(Outcome::False(worst + 1));
                break;
            }
        }
        self.on_path.remove(&p);
        let result = result.unwrap_or(if unknown { Outcome::Unknown } else { Outcome::True });
        match result {
            Outcome::False(_) => {
                self.pending.truncate(mark);
                self.cache.insert(p, result);
                (result, NONE)
            }
            _ if low >= depth => {
                if result == Outcome::True {
                    for q in self.pending.drain(mark..) {
                        self.cache.insert(q, Outcome::True);
                    }
                } else {
                    self.pending.truncate(mark);
                }
                self.cache.insert(p, result);
                (result, NONE)
            }
            Outcome::True => {
                self.pending.push(p);
                (result, low)
            }
            Outcome::Unknown => {
                self.pending.truncate(mark);
                self.cache.insert(p, result);
                (result, NONE)
            }
        }
    }
}

/// Runs `f` on a thread with a large stack; the searches recurse deeply.
pub(crate) fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn solver thread")
            .join()
            .expect("solver thread panicked")
    })
}

/// Solves the game from `(c, d)` with stacks up to `cap`.
pub(crate) fn solve(game: &mut Game, c: u32, d: u32, cap: u32, budget: usize) -> SolveStats {
    let mut solver = Solver {
        game,
        cap,
        budget,
        visits: 0,
        cache: FxHashMap::default(),
        on_path: FxHashMap::default(),
        pending: Vec::new(),
        budget_hit: false,
    };
    let (outcome, _) = solver.solve(norm(c, d), 0);
    let relation = solver
        .cache
        .values()
        .filter(|&&r| r == Outcome::True)
        .count() as u64;
    SolveStats {
        outcome,
        relation,
        budget_hit: solver.budget_hit,
    }
}

/// Memoized bounded-round minimax: does Attacker win within `r` rounds?
pub(crate) struct Rounds<'g, 'a> {
    pub game: &'g mut Game<'a>,
    /// `(lo, hi)`: Attacker loses every game shorter than `lo` rounds and
    /// wins every game of at least `hi` rounds.
    memo: FxHashMap<(u32, u32), (u32, u32)>,
    budget: usize,
    visits: usize,
}

pub(crate) struct OutOfBudget;

impl<'g, 'a> Rounds<'g, 'a> {
    pub fn new(game: &'g mut Game<'a>, budget: usize) -> Self {
        Self {
            game,
            memo: FxHashMap::default(),
            budget,
            visits: 0,
        }
    }

    pub fn wins(&mut self, c: u32, d: u32, r: u32) -> Result<bool, OutOfBudget> {
        if c == d || r == 0 {
            return Ok(false);
        }
        let p = norm(c, d);
        let (lo, hi) = self.memo.get(&p).copied().unwrap_or((1, u32::MAX));
        if r >= hi {
            return Ok(true);
        }
        if r < lo {
            return Ok(false);
        }
        self.visits += 1;
        if self.visits > self.budget {
            return Err(OutOfBudget);
        }
        let mut won = false;
        'moves: for (_, _, x, replies) in self.game.moves(p) {
            for &y in &replies {
                if !self.wins(x, y, r - 1)? {
                    continue 'moves;
                }
            }
            won = true;
            break;
        }
        let entry = self.memo.entry(p).or_insert((1, u32::MAX));
        if won {
            entry.1 = entry.1.min(r);
        } else {
            entry.0 = entry.0.max(r + 1);
        }
        Ok(won)
    }

    /// The least `r ≤ max` with Attacker winning in `r` rounds.
    pub fn rank(&mut self, c: u32, d: u32, max: u32) -> Result<Option<u32>, OutOfBudget> {
        for r in 1..=max {
            if self.wins(c, d, r)? {
                return Ok(Some(r));
            }
        }
        Ok(None)
    }

    /// Attacker's optimal play from a pair of rank `r`, against Defender
    /// replies that survive longest.
    pub fn witness(&mut self, mut c: u32, mut d: u32, mut r: u32) -> Result<Vec<AttackerMove>, OutOfBudget> {
        let mut out = Vec::new();
        while r > 0 {
            let moves = self.game.moves((c, d));
            let mut next = None;
            'moves: for (side, a, x, replies) in moves {
                let mut longest = None;
                for &y in &replies {
                    if !self.wins(x, y, r - 1)? {
                        continue 'moves;
                    }
                    if longest.is_none() && (r < 2 || !self.wins(x, y, r - 2)?) {
                        longest = Some(y);
                    }
                }
                next = Some((side, a, x, longest));
                break;
            }
            let Some((side, a, x, reply)) = next else { break };
            out.push(AttackerMove {
                side,
                action: self.game.pda().action_at(a).clone(),
            });
            let Some(y) = reply else { break };
            (c, d) = if side == Side::Left { (x, y) } else { (y, x) };
            r -= 1;
        }
        Ok(out)
    }
}
