//! Round-by-round signature refinement with stable block ids.
//!
//! Round `r` splits every block by the signature `{(a, block(t)) | c -a-> t}`
//! computed against round `r − 1`. Only configurations with a successor that
//! changed block are re-signed. When a block splits, the group whose
//! signature is unchanged keeps the id; every other group gets a new id whose
//! parent is the old one, so the block of any node at any round can be
//! recovered afterwards.

use rustc_hash::FxHashMap;

/// Successor lists in CSR form with predecessor lists alongside.
pub(crate) struct Csr<'a> {
    pub offsets: &'a [u32],
    pub edges: &'a [(u32, u32)],
}

impl Csr<'_> {
    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn succ(&self, c: u32) -> &[(u32, u32)] {
        let c = c as usize;
        &self.edges[self.offsets[c] as usize..self.offsets[c + 1] as usize]
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Refinement {
    pub block_of: Vec<u32>,
    parent: Vec<u32>,
    born: Vec<u32>,
    /// Last round in which some block split.
    pub rounds: u32,
    sizes: Vec<u32>,
}

const NO_PARENT: u32 = u32::MAX;

impl Refinement {
    fn block_at(&self, c: u32, round: u32) -> u32 {
        let mut b = self.block_of[c as usize];
        while self.born[b as usize] > round {
            b = self.parent[b as usize];
        }
        b
    }

    /// First round that separates `c` and `d`, if any.
    pub fn rank(&self, c: u32, d: u32) -> Option<u32> {
        if self.block_of[c as usize] == self.block_of[d as usize] {
            return None;
        }
        if self.block_at(c, 0) != self.block_at(d, 0) {
            return Some(0);
        }
        // Equal at `lo`, different at `hi`.
        let (mut lo, mut hi) = (0, self.rounds);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.block_at(c, mid) == self.block_at(d, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }

    /// Number of pairs in the final equivalence.
    pub fn relation_size(&self) -> u64 {
        self.sizes.iter().map(|&s| u64::from(s) * u64::from(s)).sum()
    }
}

/// Refines `initial` (a block id per node, ids dense from 0) to the
/// coarsest stable partition.
pub(crate) fn refine(graph: &Csr, initial: Vec<u32>) -> Refinement {
    let n = graph.len();
    let block_count = initial.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); block_count];
    for (c, &b) in initial.iter().enumerate() {
        members[b as usize].push(c as u32);
    }
    let mut block_of = initial;
    let mut parent = vec![NO_PARENT; block_count];
    let mut born = vec![0u32; block_count];

    // Predecessors in CSR form.
    let mut pred_off = vec![0u32; n + 1];
    for &(_, t) in graph.edges {
        pred_off[t as usize + 1] += 1;
    }
    for i in 0..n {
        pred_off[i + 1] += pred_off[i];
    }
    let mut fill = pred_off.clone();
    let mut preds = vec![0u32; graph.edges.len()];
    for c in 0..n as u32 {
        for &(_, t) in graph.succ(c) {
            preds[fill[t as usize] as usize] = c;
            fill[t as usize] += 1;
        }
    }

    let mut dirty_mark = vec![false; n];
    let mut dirty: Vec<u32> = (0..n as u32).collect();
    let mut round = 0u32;
    let mut rounds = 0u32;
    let mut sig_buf: Vec<(u32, u32)> = Vec::new();

    loop {
        round += 1;
        if dirty.is_empty() {
            break;
        }
        for &c in &dirty {
            dirty_mark[c as usize] = true;
        }
        // Dirty nodes grouped by block, blocks in ascending id order.
        let mut by_block: FxHashMap<u32, Vec<u32>> = FxHashMap::default();
        for &c in &dirty {
            by_block.entry(block_of[c as usize]).or_default().push(c);
        }
        let mut blocks: Vec<u32> = by_block.keys().copied().collect();
        blocks.sort_unstable();

        let mut moves: Vec<(u32, u32)> = Vec::new();
        for b in blocks {
            let ds = &by_block[&b];
            let size = members[b as usize].len();
            if size <= 1 {
                continue;
            }
            // Signatures are computed before any block of this round moves.
            let sig = |c: u32, buf: &mut Vec<(u32, u32)>| {
                buf.clear();
                buf.extend(graph.succ(c).iter().map(|&(a, t)| (a, block_of[t as usize])));
                buf.sort_unstable();
                buf.dedup();
            };
            let clean = members[b as usize]
                .iter()
                .copied()
                .find(|&c| !dirty_mark[c as usize]);
            let mut groups: FxHashMap<Vec<(u32, u32)>, Vec<u32>> = FxHashMap::default();
            let mut order: Vec<Vec<(u32, u32)>> = Vec::new();
            let mut keep_sig = None;
            if let Some(c) = clean {
                sig(c, &mut sig_buf);
                keep_sig = Some(sig_buf.clone());
            }
            for &c in ds {
                sig(c, &mut sig_buf);
                if keep_sig.as_deref() == Some(sig_buf.as_slice()) {
                    continue;
                }
                match groups.get_mut(sig_buf.as_slice()) {
                    Some(g) => g.push(c),
                    None => {
                        order.push(sig_buf.clone());
                        groups.insert(sig_buf.clone(), vec![c]);
                    }
                }
            }
            if keep_sig.is_none() {
                if order.len() <= 1 {
                    continue;
                }
                // No clean members: the largest group keeps the id.
                let largest = (0..order.len())
                    .max_by_key(|&i| (groups[&order[i]].len(), std::cmp::Reverse(i)))
                    .expect("nonempty");
                groups.remove(&order[largest]);
                order.remove(largest);
            }
            for key in order {
                let group = groups.remove(&key).expect("present");
                let nb = members.len() as u32;
                members.push(Vec::new());
                parent.push(b);
                born.push(round);
                for c in group {
                    moves.push((c, nb));
                }
            }
        }
        for &c in &dirty {
            dirty_mark[c as usize] = false;
        }
        if moves.is_empty() {
            break;
        }
        rounds = round;
        let mut touched: Vec<u32> = Vec::new();
        for &(c, nb) in &moves {
            let old = block_of[c as usize];
            block_of[c as usize] = nb;
            members[nb as usize].push(c);
            touched.push(old);
        }
        touched.sort_unstable();
        touched.dedup();
        for old in touched {
            let bo = &block_of;
            members[old as usize].retain(|&c| bo[c as usize] == old);
        }
        dirty.clear();
        for &(c, _) in &moves {
            let c = c as usize;
            for &p in &preds[pred_off[c] as usize..pred_off[c + 1] as usize] {
                if !dirty_mark[p as usize] {
                    dirty_mark[p as usize] = true;
                    dirty.push(p);
                }
            }
        }
        for &c in &dirty {
            dirty_mark[c as usize] = false;
        }
    }

    let sizes = members.iter().map(|m| m.len() as u32).collect();
    Refinement {
        block_of,
        parent,
        born,
        rounds,
        sizes,
    }
}
