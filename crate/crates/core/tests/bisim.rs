use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, RngSeed};

use pdbisim_core::bisim::{approx_distinguish, capped_bisim, capped_bisim_with_budget, finite_lts_bisim, Verdict};
use pdbisim_core::explore::DEFAULT_NODE_BUDGET;
use pdbisim_core::lts::{ActionLabel, Config, ControlState, FiniteLts, Pda, PdaBuilder, Rule, StackSymbol};

const STATES: [&str; 4] = ["p0", "p1", "p2", "p3"];
const SYMBOLS: [&str; 2] = ["x", "y"];
const ACTIONS: [&str; 2] = ["a", "b"];

fn st(i: usize) -> ControlState {
    ControlState::plain(STATES[i]).unwrap()
}

fn sym(i: usize) -> StackSymbol {
    StackSymbol::new(SYMBOLS[i]).unwrap()
}

fn act(i: usize) -> ActionLabel {
    ActionLabel::new(ACTIONS[i]).unwrap()
}

/// `(kind, source, action, target, symbol)`; kind 0 is internal, 1 push, 2 pop.
type RawRule = (u8, usize, usize, usize, usize);

fn raw_rules(kinds: u8) -> impl Strategy<Value = Vec<RawRule>> {
    proptest::collection::vec((0..kinds, 0..4usize, 0..2usize, 0..4usize, 0..2usize), 0..10)
}

fn pda(rules: &[RawRule]) -> Pda {
    let mut b = PdaBuilder::new();
    for i in 0..4 {
        b.declare_state(st(i));
    }
    for i in 0..2 {
        b.declare_symbol(sym(i));
    }
    for &(kind, p, a, q, s) in rules {
        b.add_rule(match kind {
            0 => Rule::internal(st(p), act(a), st(q)),
            1 => Rule::push(st(p), act(a), st(q), sym(s)),
            _ => Rule::pop(st(p), sym(s), act(a), st(q)),
        });
    }
    b.build()
}

fn config(p: usize, stack: &[usize]) -> Config {
    Config::new(st(p), stack.iter().map(|&s| sym(s)).collect())
}

fn pt_config(seed: u64) -> PtConfig {
    PtConfig {
        cases: 150,
        rng_seed: RngSeed::Fixed(seed),
        ..PtConfig::default()
    }
}

proptest! {
    #![proptest_config(pt_config(0xb15))]

    #[test]
    fn internal_rules_agree_with_finite_check(rules in raw_rules(1), p in 0..4usize, q in 0..4usize) {
        let pda = pda(&rules);
        let mut lts = FiniteLts::new();
        for s in STATES {
            lts.add_state(s);
        }
        for &(_, a, l, b, _) in &rules {
            lts.add_edge(STATES[a], ACTIONS[l], STATES[b]).unwrap();
        }
        let want = finite_lts_bisim(&lts, STATES[p], STATES[q]).unwrap();
        let got = capped_bisim(&pda, &config(p, &[]), &config(q, &[]), 4).unwrap();
        prop_assert_eq!(got.is_bisimilar(), want, "{}", got);
        prop_assert_eq!(got.is_not_bisimilar(), !want, "{}", got);
    }

    #[test]
    fn capped_verdicts_match_bounded_rounds(
        rules in raw_rules(3),
        p in 0..4usize,
        q in 0..4usize,
        u in proptest::collection::vec(0..2usize, 0..3),
        v in proptest::collection::vec(0..2usize, 0..3),
    ) {
        let pda = pda(&rules);
        let (c, d) = (config(p, &u), config(q, &v));
        match capped_bisim(&pda, &c, &d, 6).unwrap() {
            Verdict::NotBisimilar { round, witness } => {
                prop_assert!(!witness.is_empty());
                let again = approx_distinguish(&pda, &c, &d, round).unwrap();
                prop_assert!(matches!(again, Verdict::NotBisimilar { round: r, .. } if r == round), "{}", again);
                if round > 1 {
                    prop_assert!(!approx_distinguish(&pda, &c, &d, round - 1).unwrap().is_not_bisimilar());
                }
            }
            Verdict::Bisimilar { .. } => {
                prop_assert!(!approx_distinguish(&pda, &c, &d, 12).unwrap().is_not_bisimilar());
            }
            Verdict::Unknown { .. } => {}
        }
    }

    #[test]
    fn verdicts_are_symmetric(rules in raw_rules(3), p in 0..4usize, q in 0..4usize, u in 0..2usize) {
        let pda = pda(&rules);
        let (c, d) = (config(p, &[u]), config(q, &[]));
        let one = capped_bisim_with_budget(&pda, &c, &d, 5, DEFAULT_NODE_BUDGET).unwrap();
        let two = capped_bisim_with_budget(&pda, &d, &c, 5, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert_eq!(one.verdict.is_bisimilar(), two.verdict.is_bisimilar());
        prop_assert_eq!(one.verdict.is_not_bisimilar(), two.verdict.is_not_bisimilar());
    }
}

#[test]
fn unbounded_counter_against_loop() {
    // p pushes on a and pops x on b; q loops on both actions.
    let pda = pda(&[(1, 0, 0, 0, 0), (2, 0, 1, 0, 0), (0, 1, 0, 1, 0), (0, 1, 1, 1, 0)]);
    let v = capped_bisim(&pda, &config(0, &[0]), &config(1, &[]), 32).unwrap();
    assert!(v.is_not_bisimilar(), "{v}");
    let Verdict::NotBisimilar { round, .. } = v else { unreachable!() };
    assert_eq!(round, 2);
}
