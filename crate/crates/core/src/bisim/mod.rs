//! Bisimilarity on finite LTSs and on capped fragments of PDA configuration
//! graphs.

mod local;
mod normed;
mod refine;

use std::fmt;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::explore::{explore, Graph, DEFAULT_NODE_BUDGET};
use crate::lts::{ActionLabel, Config, FiniteLts, Pda};
use local::{with_big_stack, Game, OutOfBudget, Outcome, Rounds};
use refine::{refine, Csr, Refinement};

pub use normed::{check_normed, check_normed_with_budget, Normedness};

/// The side of the game on which Attacker moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "L",
            Side::Right => "R",
        })
    }
}

/// One Attacker move of a distinguishing play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackerMove {
    pub side: Side,
    pub action: ActionLabel,
}

impl fmt::Display for AttackerMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.side, self.action)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    /// The explored fragment was cut by the stack cap.
    CapHit,
    /// The round or node budget ran out.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// `certificate` is the number of pairs in the bisimulation found.
    Bisimilar { certificate: u64 },
    /// Distinguished by `round` rounds and not fewer. The witness is
    /// Attacker's play against Defender's longest-surviving replies.
    NotBisimilar {
        round: u32,
        witness: Vec<AttackerMove>,
    },
    Unknown { reason: UnknownReason },
}

impl Verdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, Verdict::Bisimilar { .. })
    }

    pub fn is_not_bisimilar(&self) -> bool {
        matches!(self, Verdict::NotBisimilar { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Bisimilar { .. } => f.write_str("Bisimilar"),
            Verdict::NotBisimilar { round, .. } => write!(f, "NotBisimilar(r={round})"),
            Verdict::Unknown { reason } => match reason {
                UnknownReason::CapHit => f.write_str("Unknown(cap-hit)"),
                UnknownReason::Budget => f.write_str("Unknown(budget)"),
            },
        }
    }
}

/// A verdict with statistics about the exploration behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub explored: usize,
    /// The verdict is complete for the cap: either the capped fragment was
    /// closed and refined exactly, or the on-the-fly search settled the root
    /// pair without leaving the cap.
    pub closed: bool,
    pub cap: usize,
}

fn refine_graph(g: &Graph, initial: Vec<u32>) -> Refinement {
    refine(
        &Csr {
            offsets: &g.offsets,
            edges: &g.edges,
        },
        initial,
    )
}

/// Attacker's play from `(c, d)` of rank `round`, with Defender answering
/// by the reply that survives longest.
fn witness(
    offsets: &[u32],
    edges: &[(u32, u32)],
    r: &Refinement,
    (mut c, mut d): (u32, u32),
    actions: &dyn Fn(u32) -> ActionLabel,
) -> Vec<AttackerMove> {
    let succ = |x: u32| &edges[offsets[x as usize] as usize..offsets[x as usize + 1] as usize];
    let mut out = Vec::new();
    while let Some(rank) = r.rank(c, d) {
        if rank <= 1 {
            let ac: IndexSet<u32> = succ(c).iter().map(|e| e.0).collect();
            let ad: IndexSet<u32> = succ(d).iter().map(|e| e.0).collect();
            let left = ac.iter().find(|a| !ad.contains(*a)).map(|&a| (Side::Left, a));
            let right = ad.iter().find(|a| !ac.contains(*a)).map(|&a| (Side::Right, a));
            if let Some((side, a)) = left.or(right) {
                out.push(AttackerMove {
                    side,
                    action: actions(a),
                });
            }
            break;
        }
        let mut chosen = None;
        'search: for side in [Side::Left, Side::Right] {
            let (att, def) = if side == Side::Left { (c, d) } else { (d, c) };
            for &(a, x) in succ(att) {
                let mut best: Option<(u32, u32)> = None;
                let mut ok = true;
                for &(_, y) in succ(def).iter().filter(|e| e.0 == a) {
                    let k = if side == Side::Left { r.rank(x, y) } else { r.rank(y, x) };
                    match k {
                        Some(k) if k < rank => {
                            if best.is_none_or(|(bk, _)| k > bk) {
                                best = Some((k, y));
                            }
                        }
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                if let (true, Some((_, y))) = (ok, best) {
                    chosen = Some((side, a, x, y));
                    break 'search;
                }
            }
        }
        let Some((side, a, x, y)) = chosen else {
            break;
        };
        out.push(AttackerMove {
            side,
            action: actions(a),
        });
        (c, d) = if side == Side::Left { (x, y) } else { (y, x) };
    }
    out
}

/// Exact bisimilarity of two states of a finite LTS.
pub fn finite_lts_bisim(lts: &FiniteLts, s: &str, t: &str) -> Result<bool> {
    Ok(finite_lts_verdict(lts, s, t)?.is_bisimilar())
}

/// [`finite_lts_bisim`] with rank and witness on failure.
pub fn finite_lts_verdict(lts: &FiniteLts, s: &str, t: &str) -> Result<Verdict> {
    let si = lts
        .state_index(s)
        .ok_or_else(|| Error::UnknownState(s.to_string()))? as u32;
    let ti = lts
        .state_index(t)
        .ok_or_else(|| Error::UnknownState(t.to_string()))? as u32;
    let n = lts.state_count();
    let mut actions: IndexSet<ActionLabel> = IndexSet::new();
    let mut triples: Vec<(u32, u32, u32)> = lts
        .edges()
        .map(|(f, a, t)| (*f as u32, actions.insert_full(a.clone()).0 as u32, *t as u32))
        .collect();
    triples.sort_unstable();
    let mut offsets = vec![0u32; n + 1];
    for &(f, _, _) in &triples {
        offsets[f as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let edges: Vec<(u32, u32)> = triples.iter().map(|&(_, a, t)| (a, t)).collect();
    let r = refine(
        &Csr {
            offsets: &offsets,
            edges: &edges,
        },
        vec![0; n],
    );
    Ok(match r.rank(si, ti) {
        None => Verdict::Bisimilar {
            certificate: r.relation_size(),
        },
        Some(round) => Verdict::NotBisimilar {
            round,
            witness: witness(&offsets, &edges, &r, (si, ti), &|a| {
                actions[a as usize].clone()
            }),
        },
    })
}

fn not_bisimilar(pda: &Pda, g: &Graph, r: &Refinement, round: u32) -> Verdict {
    Verdict::NotBisimilar {
        round,
        witness: witness(&g.offsets, &g.edges, r, (g.roots[0], g.roots[1]), &|a| {
            pda.action_at(a).clone()
        }),
    }
}

/// Bisimilarity of two configurations, exploring only stacks of height at
/// most `stack_cap`.
///
/// If the fragment reachable under the cap is closed, partition refinement
/// answers exactly. Otherwise the game is solved on the fly from the root
/// pair: `Bisimilar` is reported only for a bisimulation that stays within
/// the cap, and `NotBisimilar` only for an Attacker strategy that does, in
/// both cases up to identical pairs.
pub fn capped_bisim(pda: &Pda, c1: &Config, c2: &Config, stack_cap: usize) -> Result<Verdict> {
    Ok(capped_bisim_with_budget(pda, c1, c2, stack_cap, DEFAULT_NODE_BUDGET)?.verdict)
}

/// Fragments up to this size are refined explicitly before the on-the-fly
/// solver is tried.
const EXPLICIT_LIMIT: usize = 200_000;

pub fn capped_bisim_with_budget(
    pda: &Pda,
    c1: &Config,
    c2: &Config,
    stack_cap: usize,
    budget: usize,
) -> Result<CheckOutcome> {
    pda.check_config(c1)?;
    pda.check_config(c2)?;
    if c1 == c2 {
        return Ok(CheckOutcome {
            verdict: Verdict::Bisimilar { certificate: 1 },
            explored: 1,
            closed: true,
            cap: stack_cap,
        });
    }
    let cap = u32::try_from(stack_cap).unwrap_or(u32::MAX - 1);
    match explore(pda, &[c1.clone(), c2.clone()], cap, budget.min(EXPLICIT_LIMIT)) {
        Ok(g) if g.closed() => {
            let r = refine_graph(&g, vec![0; g.len()]);
            let verdict = match r.rank(g.roots[0], g.roots[1]) {
                None => Verdict::Bisimilar {
                    certificate: r.relation_size(),
                },
                Some(round) => not_bisimilar(pda, &g, &r, round),
            };
            return Ok(CheckOutcome {
                verdict,
                explored: g.len(),
                closed: true,
                cap: stack_cap,
            });
        }
        Ok(_) | Err(Error::Budget { .. }) => {}
        Err(e) => return Err(e),
    }
    with_big_stack(|| {
        let mut game = Game::new(pda);
        let (x, y) = (game.intern(c1), game.intern(c2));
        let stats = local::solve(&mut game, x, y, cap, budget);
        let verdict = match stats.outcome {
            Outcome::True => Verdict::Bisimilar {
                certificate: stats.relation,
            },
            Outcome::False(bound) => exact_rank(&mut game, x, y, bound, budget),
            Outcome::Unknown => Verdict::Unknown {
                reason: if stats.budget_hit {
                    UnknownReason::Budget
                } else {
                    UnknownReason::CapHit
                },
            },
        };
        Ok(CheckOutcome {
            verdict,
            explored: game.len(),
            closed: stats.outcome != Outcome::Unknown,
            cap: stack_cap,
        })
    })
}

/// The least distinguishing round, at most `bound`, with a witness play.
fn exact_rank(game: &mut Game, x: u32, y: u32, bound: u32, budget: usize) -> Verdict {
    let mut rounds = Rounds::new(game, budget);
    let found = rounds.rank(x, y, bound).and_then(|r| {
        let r = r.expect("an Attacker strategy of this length exists");
        Ok((r, rounds.witness(x, y, r)?))
    });
    match found {
        Ok((round, witness)) => Verdict::NotBisimilar { round, witness },
        Err(OutOfBudget) => Verdict::Unknown {
            reason: UnknownReason::Budget,
        },
    }
}

/// Runs [`capped_bisim`] with growing caps up to `max_cap` until the
/// verdict is no longer `Unknown`.
///
/// Each step grows the cap by an eighth, and by at least 2. Deeper caps
/// enlarge the on-the-fly search quickly, so small steps find the
/// smallest deciding cap without overshooting it. A budget-exhausted run
/// stops the escalation.
pub fn escalating_bisim(
    pda: &Pda,
    c1: &Config,
    c2: &Config,
    start_cap: usize,
    max_cap: usize,
    budget: usize,
) -> Result<CheckOutcome> {
    let min = c1.stack.len().max(c2.stack.len()).max(1);
    let mut cap = start_cap.max(min);
    loop {
        let out = match capped_bisim_with_budget(pda, c1, c2, cap, budget) {
            Ok(o) => o,
            Err(Error::Budget { .. }) => {
                return Ok(CheckOutcome {
                    verdict: Verdict::Unknown {
                        reason: UnknownReason::Budget,
                    },
                    explored: budget,
                    closed: false,
                    cap,
                })
            }
            Err(e) => return Err(e),
        };
        let cut = out.verdict
            == Verdict::Unknown {
                reason: UnknownReason::CapHit,
            };
        if !cut || cap >= max_cap {
            return Ok(out);
        }
        cap = (cap + (cap / 8).max(2)).min(max_cap);
    }
}

/// Looks for a distinguishing play of at most `max_rounds` rounds by
/// memoized minimax over the game graph.
///
/// Returns `NotBisimilar` with the exact rank, or `Unknown(Budget)` when
/// the configurations are equivalent up to `max_rounds`.
pub fn approx_distinguish(pda: &Pda, c1: &Config, c2: &Config, max_rounds: u32) -> Result<Verdict> {
    approx_distinguish_with_budget(pda, c1, c2, max_rounds, DEFAULT_NODE_BUDGET)
}

pub fn approx_distinguish_with_budget(
    pda: &Pda,
    c1: &Config,
    c2: &Config,
    max_rounds: u32,
    budget: usize,
) -> Result<Verdict> {
    pda.check_config(c1)?;
    pda.check_config(c2)?;
    with_big_stack(|| {
        let mut game = Game::new(pda);
        let (x, y) = (game.intern(c1), game.intern(c2));
        let mut rounds = Rounds::new(&mut game, budget);
        let over = |_| Error::Budget { limit: budget };
        match rounds.rank(x, y, max_rounds).map_err(over)? {
            Some(round) => Ok(Verdict::NotBisimilar {
                round,
                witness: rounds.witness(x, y, round).map_err(over)?,
            }),
            None => Ok(Verdict::Unknown {
                reason: UnknownReason::Budget,
            }),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{ControlState, PdaBuilder, Rule, StackSymbol};

    fn st(s: &str) -> ControlState {
        ControlState::parse(s).unwrap()
    }

    fn a(s: &str) -> ActionLabel {
        ActionLabel::new(s).unwrap()
    }

    fn cfg(s: &str) -> Config {
        Config::parse(s).unwrap()
    }

    fn loop_vs_step() -> Pda {
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::internal(st("p"), a("a"), st("p")));
        b.add_rule(Rule::internal(st("q"), a("a"), st("d")));
        b.build()
    }

    #[test]
    fn two_deadlocks() {
        let mut lts = FiniteLts::new();
        lts.add_state("x");
        lts.add_state("y");
        assert!(finite_lts_bisim(&lts, "x", "y").unwrap());
        assert!(matches!(
            finite_lts_bisim(&lts, "x", "z"),
            Err(Error::UnknownState(_))
        ));
    }

    #[test]
    fn approx_examples() {
        let pda = loop_vs_step();
        assert_eq!(
            approx_distinguish(&pda, &cfg("p"), &cfg("p"), 5).unwrap(),
            Verdict::Unknown {
                reason: UnknownReason::Budget
            }
        );
        match approx_distinguish(&pda, &cfg("p"), &cfg("q"), 5).unwrap() {
            Verdict::NotBisimilar { round, witness } => {
                assert_eq!(round, 2);
                assert_eq!(witness.len(), 2);
            }
            v => panic!("{v:?}"),
        }
        assert!(matches!(
            approx_distinguish(&pda, &cfg("p"), &cfg("q"), 1).unwrap(),
            Verdict::Unknown { .. }
        ));
        assert!(matches!(
            approx_distinguish(&pda, &cfg("d"), &cfg("d"), 3).unwrap(),
            Verdict::Unknown { .. }
        ));
    }

    #[test]
    fn identical_configs_short_circuit() {
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::push(
            st("q"),
            a("a"),
            st("q"),
            StackSymbol::new("s").unwrap(),
        ));
        let pda = b.build();
        for cap in [0, 1, 5] {
            assert!(capped_bisim(&pda, &cfg("q"), &cfg("q"), cap)
                .unwrap()
                .is_bisimilar());
        }
    }

    #[test]
    fn unbounded_pushers_are_bisimilar_across_the_cut() {
        // Bisimilar, but every bisimulation relates two distinct cut
        // configurations, so no capped fragment proves it.
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::push(st("p"), a("a"), st("p"), StackSymbol::new("s").unwrap()));
        b.add_rule(Rule::push(st("q"), a("a"), st("q"), StackSymbol::new("t").unwrap()));
        let pda = b.build();
        assert_eq!(
            capped_bisim(&pda, &cfg("p"), &cfg("q"), 4).unwrap(),
            Verdict::Unknown {
                reason: UnknownReason::CapHit
            }
        );
    }

    #[test]
    fn converging_pushers_are_bisimilar_with_cut() {
        // p and q both step into the same unbounded pusher r.
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::internal(st("p"), a("a"), st("r")));
        b.add_rule(Rule::internal(st("q"), a("a"), st("r")));
        b.add_rule(Rule::push(st("r"), a("a"), st("r"), StackSymbol::new("s").unwrap()));
        let pda = b.build();
        let out = capped_bisim_with_budget(&pda, &cfg("p"), &cfg("q"), 3, 100).unwrap();
        assert!(out.closed);
        assert!(out.verdict.is_bisimilar());
    }

    #[test]
    fn distinction_near_roots_survives_cut() {
        let mut b = PdaBuilder::new();
        b.add_rule(Rule::push(st("p"), a("a"), st("p"), StackSymbol::new("s").unwrap()));
        b.add_rule(Rule::push(st("q"), a("b"), st("q"), StackSymbol::new("s").unwrap()));
        let pda = b.build();
        match capped_bisim(&pda, &cfg("p"), &cfg("q"), 2).unwrap() {
            Verdict::NotBisimilar { round, witness } => {
                assert_eq!(round, 1);
                assert_eq!(witness[0].side, Side::Left);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn verdict_is_symmetric() {
        let pda = loop_vs_step();
        let ab = capped_bisim(&pda, &cfg("p"), &cfg("q"), 0).unwrap();
        let ba = capped_bisim(&pda, &cfg("q"), &cfg("p"), 0).unwrap();
        match (ab, ba) {
            (
                Verdict::NotBisimilar { round: r1, .. },
                Verdict::NotBisimilar { round: r2, .. },
            ) => assert_eq!(r1, r2),
            other => panic!("{other:?}"),
        }
    }
}
