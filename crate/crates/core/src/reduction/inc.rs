//! The increment transducers over `Ω_ℓ ∪ Ω_{ℓ+1}`.

use crate::lts::StackSymbol;
use crate::transducer::Transducer;

fn sym(bit: bool, level: u32) -> String {
    StackSymbol::omega(bit, level).name().to_string()
}

/// Returns `(T⁺⁰_ℓ, T⁺¹_ℓ)`.
///
/// Both read a level-`ℓ` number least significant bit first. `T⁺⁰_ℓ` copies
/// it and prints `a` on the closing `Ω_{ℓ+1}` symbol. `T⁺¹_ℓ` prints the
/// successor, with `a` on the closing symbol, or `b` if the number was all
/// ones. Once the closing symbol is read both move to `done`, which prints
/// `a` on every further letter.
pub fn make_inc_transducers(level: u32) -> (Transducer, Transducer) {
    let (z, o) = (sym(false, level), sym(true, level));
    let (zn, on) = (sym(false, level + 1), sym(true, level + 1));
    let inputs = [z.as_str(), o.as_str(), zn.as_str(), on.as_str()];
    let outputs = ["0", "1", "a", "b"];
    let done = |e: &mut Vec<(&'static str, String, &'static str, Vec<&'static str>)>| {
        for i in [&z, &o, &zn, &on] {
            e.push(("done", i.clone(), "done", vec!["a"]));
        }
    };

    let mut e0 = vec![
        ("copy", z.clone(), "copy", vec!["0"]),
        ("copy", o.clone(), "copy", vec!["1"]),
        ("copy", zn.clone(), "done", vec!["a"]),
        ("copy", on.clone(), "done", vec!["a"]),
    ];
    done(&mut e0);
    let plus0 = Transducer::new(
        &["copy", "done"],
        "copy",
        &inputs,
        &outputs,
        e0.iter().map(|(q, a, r, w)| (*q, a.as_str(), *r, w.clone())),
    )
    .expect("well-formed");

    let mut e1 = vec![
        ("carry", o.clone(), "carry", vec!["0"]),
        ("carry", z.clone(), "copy", vec!["1"]),
        ("carry", zn.clone(), "done", vec!["b"]),
        ("carry", on.clone(), "done", vec!["b"]),
        ("copy", z.clone(), "copy", vec!["0"]),
        ("copy", o.clone(), "copy", vec!["1"]),
        ("copy", zn.clone(), "done", vec!["a"]),
        ("copy", on.clone(), "done", vec!["a"]),
    ];
    done(&mut e1);
    let plus1 = Transducer::new(
        &["carry", "copy", "done"],
        "carry",
        &inputs,
        &outputs,
        e1.iter().map(|(q, a, r, w)| (*q, a.as_str(), *r, w.clone())),
    )
    .expect("well-formed");
    (plus0, plus1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(t: &Transducer, w: &str) -> String {
        let word: Vec<&str> = w.split_whitespace().collect();
        t.run(&word).unwrap().join(" ")
    }

    #[test]
    fn hand_simulations() {
        let (p0, p1) = make_inc_transducers(0);
        assert_eq!(run(&p1, "1_0 0_0 0_1"), "0 1 a");
        assert_eq!(run(&p0, "0_0 1_0 0_1"), "0 1 a");
        assert_eq!(run(&p1, "1_0 1_0 1_1"), "0 0 b");
        assert_eq!(run(&p1, "1_0 1_0 0_1"), "0 0 b");
        assert_eq!(p0.states().len(), 2);
        assert_eq!(p1.states().len(), 3);
        assert!(p0.is_letter_to_letter() && p1.is_letter_to_letter());
    }
}
