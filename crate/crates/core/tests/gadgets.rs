use pdbisim_core::bisim::{capped_bisim, finite_lts_bisim};
use pdbisim_core::lts::{Config, FiniteLts, RuleKind, StackSymbol};
use pdbisim_core::macro_text::expand_macros;
use pdbisim_core::macros::{expand_att_choice, expand_def_choice, StatePair};

/// Checks `●s ∼ s●` for a choice over `targets.len()` options, where
/// option `i` leads to a bisimilar pair iff `good[i]`.
fn choice_holds(defender: bool, good: &[bool]) -> bool {
    let s = StatePair::new("s").unwrap();
    let targets: Vec<StatePair> = (0..good.len()).map(|i| StatePair::new(format!("t{i}")).unwrap()).collect();
    let options: Vec<_> = targets.iter().map(|t| (t.clone(), vec![])).collect();
    let e = if defender {
        expand_def_choice(&s, &options)
    } else {
        expand_att_choice(&s, &options)
    }
    .unwrap();
    let mut lts = FiniteLts::new();
    for r in &e.rules {
        assert_eq!(r.kind, RuleKind::Internal);
        lts.add_edge(&r.source.to_string(), r.action.name(), &r.target.to_string())
            .unwrap();
    }
    for (t, &g) in targets.iter().zip(good) {
        lts.add_edge(&t.left().to_string(), "d", "end").unwrap();
        if g {
            lts.add_edge(&t.right().to_string(), "d", "end").unwrap();
        } else {
            lts.add_state(&t.right().to_string());
        }
    }
    finite_lts_bisim(&lts, &s.left().to_string(), &s.right().to_string()).unwrap()
}

#[test]
fn nested_choices_follow_or_and_and() {
    for width in 1..=4usize {
        for mask in 0..1u32 << width {
            let good: Vec<bool> = (0..width).map(|i| mask >> i & 1 == 1).collect();
            assert_eq!(choice_holds(true, &good), good.iter().any(|&g| g), "Or {good:?}");
            assert_eq!(choice_holds(false, &good), good.iter().all(|&g| g), "And {good:?}");
        }
    }
}

#[test]
fn pushed_options_reach_their_targets() {
    let text = "\
stack x y
def s : t x y | u
chain .t x -> .w : c
chain t. x -> w. : c
chain .u y -> .w : c
";
    let pda = expand_macros(text).unwrap();
    let l = Config::parse(".s | y").unwrap();
    let r = Config::parse("s. | y").unwrap();
    assert!(capped_bisim(&pda, &l, &r, 8).unwrap().is_bisimilar());
    let x = StackSymbol::new("x").unwrap();
    assert!(pda.stack_alphabet().contains(&x));
}

#[test]
fn attacker_choice_with_one_bad_branch_fails() {
    let text = "\
stack x
att s : t x | u
chain .t x -> .w : c
chain t. x -> w. : c
chain .u x -> .w : c
";
    let pda = expand_macros(text).unwrap();
    let l = Config::parse(".s | x").unwrap();
    let r = Config::parse("s. | x").unwrap();
    assert!(capped_bisim(&pda, &l, &r, 8).unwrap().is_not_bisimilar());
}
