//! Breadth-first exploration of the configuration graph with shared stacks.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lts::{Config, Pda};

/// Default limit on explored configurations.
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

const EMPTY: u32 = 0;

/// Hash-consed stacks: every node is a symbol on top of a parent stack.
#[derive(Debug, Clone)]
pub(crate) struct StackArena {
    nodes: Vec<(u32, u32, u32)>,
    index: FxHashMap<(u32, u32), u32>,
}

impl Default for StackArena {
    fn default() -> Self {
        Self {
            nodes: vec![(u32::MAX, EMPTY, 0)],
            index: FxHashMap::default(),
        }
    }
}

impl StackArena {
    pub fn empty(&self) -> u32 {
        EMPTY
    }

    pub fn push(&mut self, sym: u32, below: u32) -> u32 {
        if let Some(&id) = self.index.get(&(sym, below)) {
            return id;
        }
        let id = self.nodes.len() as u32;
        let height = self.nodes[below as usize].2 + 1;
        self.nodes.push((sym, below, height));
        self.index.insert((sym, below), id);
        id
    }

    pub fn top(&self, node: u32) -> Option<u32> {
        (node != EMPTY).then(|| self.nodes[node as usize].0)
    }

    pub fn below(&self, node: u32) -> u32 {
        self.nodes[node as usize].1
    }

    pub fn height(&self, node: u32) -> u32 {
        self.nodes[node as usize].2
    }

    /// Interns a top-first word.
    pub fn intern(&mut self, word: &[u32]) -> u32 {
        word.iter().rev().fold(EMPTY, |acc, &s| self.push(s, acc))
    }

    /// The top-first word of a node.
    pub fn word(&self, mut node: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.height(node) as usize);
        while node != EMPTY {
            out.push(self.nodes[node as usize].0);
            node = self.nodes[node as usize].1;
        }
        out
    }
}

/// An explored fragment of the configuration graph in CSR form.
///
/// A configuration is *boundary* when some of its successors are missing
/// because they exceed the stack cap.
#[derive(Debug, Clone)]
pub(crate) struct Graph {
    pub arena: StackArena,
    pub configs: Vec<(u32, u32)>,
    pub offsets: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
    pub boundary: Vec<bool>,
    pub roots: Vec<u32>,
}

impl Graph {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn successors(&self, c: u32) -> &[(u32, u32)] {
        let c = c as usize;
        &self.edges[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }

    pub fn closed(&self) -> bool {
        !self.boundary.iter().any(|&b| b)
    }

    pub fn config(&self, pda: &Pda, c: u32) -> Config {
        let (s, st) = self.configs[c as usize];
        Config::new(
            pda.state_at(s).clone(),
            self.arena
                .word(st)
                .into_iter()
                .map(|x| pda.symbol_at(x).clone())
                .collect(),
        )
    }
}

/// Explores from `roots`, keeping stacks of height at most `cap`; returns
/// `Error::Budget` past `budget` configurations.
pub(crate) fn explore(pda: &Pda, roots: &[Config], cap: u32, budget: usize) -> Result<Graph> {
    let mut arena = StackArena::default();
    let mut index: FxHashMap<(u32, u32), u32> = FxHashMap::default();
    let mut configs = Vec::new();
    let mut root_ids = Vec::new();
    for r in roots {
        pda.check_config(r)?;
        let s = pda.state_index(&r.state).expect("checked");
        let word: Vec<u32> = r
            .stack
            .iter()
            .map(|x| pda.symbol_index(x).expect("checked"))
            .collect();
        let st = arena.intern(&word);
        let id = *index.entry((s, st)).or_insert_with(|| {
            configs.push((s, st));
            (configs.len() - 1) as u32
        });
        root_ids.push(id);
    }
    if configs.len() > budget {
        return Err(Error::Budget { limit: budget });
    }

    let compiled = pda.compiled();
    let mut offsets = vec![0u32];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut boundary = Vec::new();
    let mut queue: VecDeque<u32> = (0..configs.len() as u32).collect();
    let mut succ: Vec<(u32, u32, u32)> = Vec::new();

    // Configurations are discovered in BFS order and expanded in id order,
    // so the CSR offsets can be appended as we go.
    while let Some(c) = queue.pop_front() {
        debug_assert_eq!(c as usize, offsets.len() - 1);
        let (s, st) = configs[c as usize];
        let mut cut = false;
        succ.clear();
        let rules = &compiled[s as usize];
        for &(a, t) in &rules.internal {
            succ.push((a, t, st));
        }
        for &(a, t, x) in &rules.push {
            if arena.height(st) + 1 > cap {
                cut = true;
                continue;
            }
            let ns = arena.push(x, st);
            succ.push((a, t, ns));
        }
        if let Some(top) = arena.top(st) {
            let below = arena.below(st);
            for (a, t) in rules.pops_of(top) {
                succ.push((a, t, below));
            }
        }
        let start = edges.len();
        for &(a, t, ns) in &succ {
            let next = configs.len() as u32;
            let id = *index.entry((t, ns)).or_insert(next);
            if id == next {
                if configs.len() >= budget {
                    return Err(Error::Budget { limit: budget });
                }
                configs.push((t, ns));
                queue.push_back(id);
            }
            edges.push((a, id));
        }
        let added = &mut edges[start..];
        added.sort_unstable();
        let mut w = start;
        for r in start..edges.len() {
            if r == start || edges[r] != edges[w - 1] {
                edges[w] = edges[r];
                w += 1;
            }
        }
        edges.truncate(w);
        offsets.push(edges.len() as u32);
        boundary.push(cut);
    }

    Ok(Graph {
        arena,
        configs,
        offsets,
        edges,
        boundary,
        roots: root_ids,
    })
}

/// Result of [`reachable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachable {
    /// Explored configurations in BFS order.
    pub configs: Vec<Config>,
    /// True iff no successor of an explored configuration exceeded the cap.
    pub closed: bool,
}

/// BFS closure of `roots` under [`step`](crate::lts::step), keeping only
/// configurations whose stack height is at most `stack_cap`.
pub fn reachable(pda: &Pda, roots: &[Config], stack_cap: usize) -> Result<Reachable> {
    reachable_with_budget(pda, roots, stack_cap, DEFAULT_NODE_BUDGET)
}

pub fn reachable_with_budget(
    pda: &Pda,
    roots: &[Config],
    stack_cap: usize,
    budget: usize,
) -> Result<Reachable> {
    let cap = u32::try_from(stack_cap).unwrap_or(u32::MAX - 1);
    let g = explore(pda, roots, cap, budget)?;
    Ok(Reachable {
        configs: (0..g.len() as u32).map(|c| g.config(pda, c)).collect(),
        closed: g.closed(),
    })
}
