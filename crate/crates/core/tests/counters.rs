use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use pdbisim_core::counters::{canonical_counter, counter_length, counter_value, tow, CounterSpec, CounterWord};
use pdbisim_core::lts::StackSymbol;

fn config() -> Config {
    Config {
        cases: 200,
        rng_seed: RngSeed::Fixed(0xc0de),
        ..Config::default()
    }
}

/// `(level, n, value)` with the value below the counter capacity.
fn counter_args() -> impl Strategy<Value = (u32, u32, BigUint)> {
    (0u32..=2, 1u32..=3).prop_flat_map(|(level, n)| {
        let bits = tow(level, n.into()).unwrap();
        let bits = u32::try_from(&bits).unwrap().min(64);
        proptest::collection::vec(any::<bool>(), bits as usize).prop_map(move |b| {
            let mut v = BigUint::default();
            for (i, bit) in b.into_iter().enumerate() {
                v.set_bit(i as u64, bit);
            }
            (level, n, v)
        })
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn value_round_trips((level, n, v) in counter_args()) {
        let w = canonical_counter(level, n, &v).unwrap();
        prop_assert_eq!(counter_value(w.symbols(), level, n).unwrap(), v);
        prop_assert_eq!(BigUint::from(w.len()), counter_length(level, n.into()).unwrap());
        prop_assert_eq!(CounterWord::parse(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn truncation_is_rejected((level, n, v) in counter_args(), cut in 1usize..8) {
        let w = canonical_counter(level, n, &v).unwrap();
        let cut = cut.min(w.len());
        prop_assert!(counter_value(&w.symbols()[..w.len() - cut], level, n).is_err());
    }

    #[test]
    fn wrong_level_is_rejected((level, n, v) in counter_args(), pos in any::<prop::sample::Index>()) {
        let mut w = canonical_counter(level, n, &v).unwrap().0;
        let i = pos.index(w.len());
        let s = &w[i];
        w[i] = StackSymbol::omega(s.bit().unwrap(), s.level().unwrap() + 1);
        prop_assert!(counter_value(&w, level, n).is_err());
    }

    #[test]
    fn counters_are_ordered_by_value((level, n, v) in counter_args()) {
        prop_assume!(v > BigUint::default());
        let a = canonical_counter(level, n, &v).unwrap();
        let b = canonical_counter(level, n, &(&v - 1u32)).unwrap();
        prop_assert_ne!(a, b);
    }
}

#[test]
fn capacity_is_the_next_tower() {
    for level in 0..3 {
        for n in 1..4 {
            assert_eq!(
                CounterSpec::new(level, n).capacity().unwrap(),
                tow(level + 1, n.into()).unwrap()
            );
        }
    }
}

#[test]
fn values_beyond_capacity_are_rejected() {
    let cap = tow(2, 2).unwrap();
    assert!(canonical_counter(1, 2, &cap).is_err());
    assert!(canonical_counter(1, 2, &(cap - 1u32)).is_ok());
}
