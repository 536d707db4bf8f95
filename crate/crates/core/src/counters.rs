//! Tower arithmetic and (ℓ,n)-counters.
//!
//! A (0,n)-counter is a word of `n` symbols from `{0_0, 1_0}`; its value is
//! read least significant bit first. An (ℓ+1,n)-counter is
//! `c_0 σ_0 c_1 σ_1 … c_m σ_m` with `m = Tow(ℓ+1,n) − 1`, every `c_i` an
//! (ℓ,n)-counter of value `i`, and `σ_i ∈ {0_{ℓ+1}, 1_{ℓ+1}}` the `i`-th bit.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lts::StackSymbol;

/// Default bound on the bit length of tower values.
pub const DEFAULT_MAX_BITS: u64 = 1 << 24;

/// Longest counter word that will be materialized.
pub const MAX_COUNTER_SYMBOLS: u64 = 1 << 26;

/// `Tow(0,n) = n`, `Tow(ℓ+1,n) = 2^Tow(ℓ,n)`.
pub fn tow(level: u32, n: u64) -> Result<BigUint> {
    tow_bounded(level, n, DEFAULT_MAX_BITS)
}

/// [`tow`] with an explicit bound on the result's bit length.
pub fn tow_bounded(level: u32, n: u64, max_bits: u64) -> Result<BigUint> {
    let mut v = BigUint::from(n);
    for _ in 0..level {
        let exp = v
            .to_u64()
            .filter(|&e| e <= max_bits)
            .ok_or(Error::Magnitude { max_bits })?;
        v = BigUint::one() << exp;
    }
    if v.bits() > max_bits {
        return Err(Error::Magnitude { max_bits });
    }
    Ok(v)
}

/// `len(0,n) = n`, `len(ℓ+1,n) = Tow(ℓ+1,n)·(len(ℓ,n)+1)`.
pub fn counter_length(level: u32, n: u64) -> Result<BigUint> {
    let mut len = BigUint::from(n);
    for l in 1..=level {
        len = tow(l, n)? * (len + 1u32);
        if len.bits() > DEFAULT_MAX_BITS {
            return Err(Error::Magnitude {
                max_bits: DEFAULT_MAX_BITS,
            });
        }
    }
    Ok(len)
}

/// The level and base of a counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterSpec {
    pub level: u32,
    pub base: u32,
}

impl CounterSpec {
    pub fn new(level: u32, base: u32) -> Self {
        Self { level, base }
    }

    pub fn length(&self) -> Result<BigUint> {
        counter_length(self.level, self.base.into())
    }

    /// Number of distinct values, `Tow(ℓ+1,n)`.
    pub fn capacity(&self) -> Result<BigUint> {
        tow(self.level + 1, self.base.into())
    }
}

/// A word over level-tagged symbols, top of stack first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CounterWord(pub Vec<StackSymbol>);

impl CounterWord {
    pub fn symbols(&self) -> &[StackSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses space-separated symbols such as `0_0 1_0 0_1`.
    pub fn parse(text: &str) -> Result<Self> {
        text.split_whitespace()
            .map(StackSymbol::new)
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl fmt::Display for CounterWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

fn small(v: &BigUint, max: u64) -> Result<u64> {
    v.to_u64()
        .filter(|&x| x <= max)
        .ok_or(Error::Magnitude { max_bits: 64 })
}

/// The (ℓ,n)-counter with value `v`.
pub fn canonical_counter(level: u32, n: u32, v: &BigUint) -> Result<CounterWord> {
    let cap = tow(level + 1, n.into())?;
    if *v >= cap {
        return Err(Error::OutOfRange {
            level,
            base: n,
            value: v.to_string(),
        });
    }
    let len = small(&counter_length(level, n.into())?, MAX_COUNTER_SYMBOLS)?;
    let mut out = Vec::with_capacity(len as usize);
    write_counter(level, n, v, &mut out)?;
    Ok(CounterWord(out))
}

fn write_counter(level: u32, n: u32, v: &BigUint, out: &mut Vec<StackSymbol>) -> Result<()> {
    if level == 0 {
        for i in 0..u64::from(n) {
            out.push(StackSymbol::omega(v.bit(i), 0));
        }
        return Ok(());
    }
    let blocks = small(&tow(level, n.into())?, MAX_COUNTER_SYMBOLS)?;
    for i in 0..blocks {
        write_counter(level - 1, n, &BigUint::from(i), out)?;
        out.push(StackSymbol::omega(v.bit(i), level));
    }
    Ok(())
}

/// The all-zero (ℓ,n)-counter.
pub fn zero_counter(level: u32, n: u32) -> Result<CounterWord> {
    canonical_counter(level, n, &BigUint::zero())
}

/// The (ℓ,n)-counter of maximal value `Tow(ℓ+1,n) − 1`.
pub fn ones_counter(level: u32, n: u32) -> Result<CounterWord> {
    canonical_counter(level, n, &(tow(level + 1, n.into())? - 1u32))
}

/// Validates `w` as an (ℓ,n)-counter and returns its value.
pub fn counter_value(w: &[StackSymbol], level: u32, n: u32) -> Result<BigUint> {
    let (v, end) = parse_counter(w, 0, level, n)?;
    if end != w.len() {
        return Err(Error::Counter {
            position: end,
            reason: format!("trailing symbol `{}`", w[end]),
        });
    }
    Ok(v)
}

/// Reads one (ℓ,n)-counter starting at `pos`; returns its value and end.
pub(crate) fn parse_counter(
    w: &[StackSymbol],
    pos: usize,
    level: u32,
    n: u32,
) -> Result<(BigUint, usize)> {
    let expect = |p: usize, lvl: u32| -> Result<bool> {
        match w.get(p) {
            Some(s) if s.level() == Some(lvl) => Ok(s.bit().expect("tagged")),
            Some(s) => Err(Error::Counter {
                position: p,
                reason: format!("expected a level-{lvl} bit, found `{s}`"),
            }),
            None => Err(Error::Counter {
                position: p,
                reason: format!("word ends where a level-{lvl} bit is expected"),
            }),
        }
    };
    let mut v = BigUint::zero();
    if level == 0 {
        for i in 0..n as usize {
            if expect(pos + i, 0)? {
                v.set_bit(i as u64, true);
            }
        }
        return Ok((v, pos + n as usize));
    }
    let blocks = small(&tow(level, n.into())?, MAX_COUNTER_SYMBOLS)?;
    let mut p = pos;
    for i in 0..blocks {
        let (inner, end) = parse_counter(w, p, level - 1, n)?;
        if inner != BigUint::from(i) {
            return Err(Error::Counter {
                position: p,
                reason: format!("inner level-{} counter has value {inner}, expected {i}", level - 1),
            });
        }
        if expect(end, level)? {
            v.set_bit(i, true);
        }
        p = end + 1;
    }
    Ok((v, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn word(text: &str) -> Vec<StackSymbol> {
        CounterWord::parse(text).unwrap().0
    }

    #[test]
    fn tower_values() {
        assert_eq!(tow(0, 5).unwrap(), big(5));
        assert_eq!(tow(2, 2).unwrap(), big(16));
        assert_eq!(tow(1, 3).unwrap(), big(8));
        assert_eq!(tow(3, 2).unwrap(), big(65536));
        assert_eq!(tow(4, 2).unwrap().bits(), 65537);
        assert!(matches!(tow(5, 2), Err(Error::Magnitude { .. })));
        assert!(matches!(tow_bounded(3, 3, 100), Err(Error::Magnitude { .. })));
    }

    #[test]
    fn lengths() {
        assert_eq!(counter_length(0, 4).unwrap(), big(4));
        assert_eq!(counter_length(1, 2).unwrap(), big(12));
        assert_eq!(counter_length(2, 2).unwrap(), big(208));
    }

    #[test]
    fn canonical_words() {
        assert_eq!(canonical_counter(0, 2, &big(2)).unwrap().to_string(), "0_0 1_0");
        assert_eq!(
            canonical_counter(1, 1, &big(0)).unwrap().to_string(),
            "0_0 0_1 1_0 0_1"
        );
        assert!(matches!(
            canonical_counter(0, 2, &big(4)),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn values() {
        assert_eq!(counter_value(&word("1_0 0_0 1_0"), 0, 3).unwrap(), big(5));
        let err = counter_value(&word("1_0 0_1 1_0 0_1"), 1, 1).unwrap_err();
        assert!(matches!(err, Error::Counter { position: 0, .. }));
        let w = canonical_counter(1, 2, &big(9)).unwrap();
        assert_eq!(counter_value(w.symbols(), 1, 2).unwrap(), big(9));
    }

    #[test]
    fn structural_errors_point_at_offender() {
        let err = counter_value(&word("0_0 1_1 1_0"), 1, 1).unwrap_err();
        assert!(matches!(err, Error::Counter { position: 3, .. }));
        let err = counter_value(&word("0_0 0_0"), 0, 1).unwrap_err();
        assert!(matches!(err, Error::Counter { position: 1, .. }));
        let err = counter_value(&word("0_0 0_0"), 1, 1).unwrap_err();
        assert!(matches!(err, Error::Counter { position: 1, .. }));
    }

    #[test]
    fn zero_and_ones() {
        for (l, n) in [(0, 1), (0, 3), (1, 1), (1, 2), (2, 1), (2, 2)] {
            let z = zero_counter(l, n).unwrap();
            let o = ones_counter(l, n).unwrap();
            assert_eq!(counter_value(z.symbols(), l, n).unwrap(), big(0));
            assert_eq!(
                counter_value(o.symbols(), l, n).unwrap(),
                tow(l + 1, n.into()).unwrap() - 1u32
            );
        }
    }
}
