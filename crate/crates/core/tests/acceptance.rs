//! Acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so the report is printed on every run; exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use indexmap::IndexSet;
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdbisim_core::bisim::{capped_bisim_with_budget, check_normed, escalating_bisim, finite_lts_bisim, Normedness};
use pdbisim_core::counters::{canonical_counter, counter_length, counter_value, ones_counter, tow, zero_counter};
use pdbisim_core::explore::DEFAULT_NODE_BUDGET;
use pdbisim_core::lts::{step, Config, ControlState, FiniteLts, RuleKind, StackSymbol};
use pdbisim_core::macros::{expand_att_choice, expand_def_choice, expand_guarded_pop, StatePair};
use pdbisim_core::reduction::{
    build_reduction, make_inc_transducers, stateless_machine, word_state, Basic, Construction,
    DtmEncoding,
};
use pdbisim_core::regex::ClassRegex;
use pdbisim_core::samples;
use pdbisim_core::transducer::Transducer;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn om(bit: bool, level: u32) -> StackSymbol {
    StackSymbol::omega(bit, level)
}

/// Or/And gadget between `s` and targets `t1`, `t2`; a target pair is made
/// bisimilar by giving both sides a `d` step, and non-bisimilar by giving
/// only the left side one.
fn gadget_truth_tables() -> Outcome {
    let t1 = StatePair::new("t1").unwrap();
    let t2 = StatePair::new("t2").unwrap();
    let s = StatePair::new("s").unwrap();
    let mut rows = 0;
    for and in [false, true] {
        for (b1, b2) in [(false, false), (false, true), (true, false), (true, true)] {
            let options = [(t1.clone(), vec![]), (t2.clone(), vec![])];
            let e = if and {
                expand_att_choice(&s, &options)
            } else {
                expand_def_choice(&s, &options)
            }
            .map_err(|e| e.to_string())?;
            let mut lts = FiniteLts::new();
            for r in &e.rules {
                ensure(r.kind == RuleKind::Internal, || format!("gadget rule {r} touches the stack"))?;
                lts.add_edge(&r.source.to_string(), r.action.name(), &r.target.to_string())
                    .map_err(|e| e.to_string())?;
            }
            for (t, bis) in [(&t1, b1), (&t2, b2)] {
                lts.add_edge(&t.left().to_string(), "d", "end").unwrap();
                if bis {
                    lts.add_edge(&t.right().to_string(), "d", "end").unwrap();
                } else {
                    lts.add_state(&t.right().to_string());
                }
            }
            let got = finite_lts_bisim(&lts, &s.left().to_string(), &s.right().to_string())
                .map_err(|e| e.to_string())?;
            let want = if and { b1 && b2 } else { b1 || b2 };
            ensure(got == want, || {
                format!("{} gadget with targets ({b1}, {b2}): got {got}", if and { "And" } else { "Or" })
            })?;
            rows += 1;
        }
    }
    Ok(format!("{rows}/8 rows"))
}

fn lsb_value(bits: &[bool]) -> u32 {
    bits.iter().enumerate().map(|(i, &b)| u32::from(b) << i).sum()
}

fn plus_one_brute_force() -> Outcome {
    let (p0, p1) = make_inc_transducers(0);
    let sigmas = [om(false, 1), om(true, 1)];
    let mut cases = 0;
    let mut mismatches = 0;
    for n in 1..=4u32 {
        let words: Vec<Vec<bool>> = (0..1u32 << n)
            .map(|v| (0..n).map(|i| v >> i & 1 == 1).collect())
            .collect();
        let input = |w: &[bool], s: &StackSymbol| -> Vec<String> {
            w.iter()
                .map(|&b| om(b, 0).name().to_string())
                .chain([s.name().to_string()])
                .collect()
        };
        for w1 in &words {
            for w2 in &words {
                for s1 in &sigmas {
                    for s2 in &sigmas {
                        let o1 = p0.run(&input(w1, s1)).map_err(|e| e.to_string())?;
                        let o2 = p1.run(&input(w2, s2)).map_err(|e| e.to_string())?;
                        if (o1 == o2) != (lsb_value(w1) == lsb_value(w2) + 1) {
                            mismatches += 1;
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    ensure(cases == 1360 && mismatches == 0, || format!("{mismatches} mismatches over {cases} cases"))?;
    Ok(format!("0 mismatches over {cases} cases"))
}

fn test_dec_exhaustive() -> Outcome {
    let n = 2;
    let c = Construction::new(1, n, false).map_err(|e| e.to_string())?;
    let pda = c.build(&[vec![Basic::TestDec(0)]]).map_err(|e| e.to_string())?;
    let counter = |v: u32| -> Vec<StackSymbol> { (0..n).map(|i| om(v >> i & 1 == 1, 0)).collect() };
    let w3 = counter(3);
    let mut pairs = 0;
    for v1 in 0..4u32 {
        for v2 in 0..4u32 {
            let stack: Vec<StackSymbol> = [
                w3.clone(),
                vec![om(false, 1)],
                counter(v2),
                vec![om(true, 1)],
                counter(v1),
                vec![om(false, 1)],
            ]
            .concat();
            let l = Config::new(word_state(&[Basic::TestDec(0)], true), stack.clone());
            let r = Config::new(word_state(&[Basic::TestDec(0)], false), stack);
            let out = capped_bisim_with_budget(&pda, &l, &r, 16, DEFAULT_NODE_BUDGET).map_err(|e| e.to_string())?;
            ensure(out.closed, || format!("w1={v1} w2={v2}: {} not closed", out.verdict))?;
            let want = v1 == v2 + 1;
            ensure(out.verdict.is_bisimilar() == want && out.verdict.is_not_bisimilar() != want, || {
                format!("w1={v1} w2={v2}: got {}", out.verdict)
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs}/16 pairs, all closed"))
}

/// Builds the canonical counter directly from its block structure.
fn oracle_counter(level: u32, n: u32, v: &BigUint) -> Vec<StackSymbol> {
    if level == 0 {
        return (0..n).map(|i| om(v.bit(u64::from(i)), 0)).collect();
    }
    let blocks = tow(level, n.into()).unwrap();
    let blocks = u64::try_from(&blocks).unwrap();
    let mut out = Vec::new();
    for i in 0..blocks {
        out.extend(oracle_counter(level - 1, n, &BigUint::from(i)));
        out.push(om(v.bit(i), level));
    }
    out
}

fn oracle_length(level: u32, n: u32) -> u64 {
    if level == 0 {
        return n.into();
    }
    let blocks = u64::try_from(&tow(level, n.into()).unwrap()).unwrap();
    blocks * (oracle_length(level - 1, n) + 1)
}

fn counter_suite() -> Outcome {
    let mut checked = 0u64;
    for level in 0..=2 {
        for n in 1..=2 {
            let cap = u64::try_from(&tow(level + 1, n.into()).unwrap()).unwrap();
            let len = oracle_length(level, n);
            ensure(counter_length(level, n.into()).unwrap() == BigUint::from(len), || {
                format!("length of ({level},{n})-counters")
            })?;
            let values: Vec<u64> = if cap <= 4096 {
                (0..cap).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(u64::from(level * 10 + n));
                [0, cap - 1].into_iter().chain((0..1024).map(|_| rng.gen_range(0..cap))).collect()
            };
            for v in values {
                let v = BigUint::from(v);
                let w = canonical_counter(level, n, &v).map_err(|e| e.to_string())?;
                ensure(w.symbols() == oracle_counter(level, n, &v).as_slice(), || {
                    format!("({level},{n})-counter of {v} differs from block construction")
                })?;
                ensure(w.len() as u64 == len, || format!("({level},{n})-counter of {v} has length {}", w.len()))?;
                let back = counter_value(w.symbols(), level, n).map_err(|e| e.to_string())?;
                ensure(back == v, || format!("({level},{n}): {v} round-trips to {back}"))?;
                checked += 1;
            }
            let zero = zero_counter(level, n).unwrap();
            ensure(zero.symbols().iter().all(|s| s.bit() == Some(false) || s.level() != Some(level)), || {
                format!("zero ({level},{n})-counter has a set top bit")
            })?;
            ensure(counter_value(zero.symbols(), level, n).unwrap() == BigUint::from(0u32), || {
                format!("zero ({level},{n})-counter value")
            })?;
            let ones = ones_counter(level, n).unwrap();
            ensure(ones.symbols().iter().all(|s| s.bit() == Some(true) || s.level() != Some(level)), || {
                format!("ones ({level},{n})-counter has a clear top bit")
            })?;
            ensure(counter_value(ones.symbols(), level, n).unwrap() == BigUint::from(cap - 1), || {
                format!("ones ({level},{n})-counter value")
            })?;
        }
    }
    Ok(format!("{checked} counters, (2,2) length {}", oracle_length(2, 2)))
}

fn random_transducer(rng: &mut ChaCha8Rng, inputs: &[String]) -> Transducer {
    let states = ["t0", "t1", "t2"];
    let used = &states[..rng.gen_range(1..=3)];
    let outputs = ["a", "b", "c"];
    let mut edges = Vec::new();
    for q in used {
        for i in inputs {
            let r = *used.choose(rng).unwrap();
            let word: Vec<&str> = (0..rng.gen_range(1..=2)).map(|_| *outputs.choose(rng).unwrap()).collect();
            edges.push((*q, i.as_str(), r, word));
        }
    }
    let inputs: Vec<&str> = inputs.iter().map(String::as_str).collect();
    Transducer::new(used, "t0", &inputs, &outputs, edges).unwrap()
}

fn random_guard(rng: &mut ChaCha8Rng, alphabet: &[StackSymbol]) -> ClassRegex {
    let class = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(1..=alphabet.len());
        ClassRegex::class(alphabet.choose_multiple(rng, k).cloned())
    };
    let parts: Vec<ClassRegex> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let c = class(rng);
            if rng.gen_bool(0.4) {
                c.star()
            } else {
                c
            }
        })
        .collect();
    ClassRegex::seq(parts).concat(class(rng))
}

fn guarded_pop_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let alphabet: IndexSet<StackSymbol> = ["x", "y", "z"].iter().map(|s| StackSymbol::new(*s).unwrap()).collect();
    let symbols: Vec<StackSymbol> = alphabet.iter().cloned().collect();
    let names: Vec<String> = symbols.iter().map(|s| s.name().to_string()).collect();
    let (p, q) = (ControlState::plain("p").unwrap(), ControlState::plain("q").unwrap());
    let mut instances = 0;
    let mut violations = Vec::new();
    while instances < 200 {
        let guard = random_guard(&mut rng, &symbols);
        let stack: Vec<StackSymbol> = (0..rng.gen_range(1..=9)).map(|_| symbols.choose(&mut rng).unwrap().clone()).collect();
        let Some(cut) = (1..=stack.len()).find(|&i| guard.matches(&stack[..i])) else {
            continue;
        };
        let trans = random_transducer(&mut rng, &names);
        let e = expand_guarded_pop(&p, &guard, &trans, &q, &alphabet).map_err(|e| e.to_string())?;
        let pda = {
            let mut b = pdbisim_core::lts::PdaBuilder::new();
            for s in &alphabet {
                b.declare_symbol(s.clone());
            }
            b.declare_state(q.clone());
            b.extend(e.rules);
            b.build()
        };
        let (w, x) = stack.split_at(cut);
        let mut want = vec!["#".to_string()];
        want.extend(trans.run(&w.iter().map(|s| s.name()).collect::<Vec<_>>()).unwrap());
        want.push("#".to_string());
        let mut c = Config::new(p.clone(), stack.clone());
        let mut read: Vec<String> = Vec::new();
        let mut branching = false;
        loop {
            let next = step(&pda, &c);
            match next.as_slice() {
                [] => break,
                [(a, d)] => {
                    read.push(a.name().to_string());
                    c = d.clone();
                }
                _ => {
                    branching = true;
                    break;
                }
            }
        }
        if branching || read != want || c != Config::new(q.clone(), x.to_vec()) {
            violations.push(format!("guard {guard} on {stack:?}: read {read:?}, ended at {c}"));
        }
        instances += 1;
    }
    ensure(violations.is_empty(), || format!("{} violations, first: {}", violations.len(), violations[0]))?;
    Ok(format!("0 violations over {instances} instances"))
}

fn end_to_end(normed: bool) -> Outcome {
    let cases = [
        ("bisimilar", samples::bisimilar_machine().unwrap(), true),
        ("non-bisimilar", samples::non_bisimilar_machine().unwrap(), false),
    ];
    let mut notes = Vec::new();
    for (name, tm, expect) in cases {
        let inst = build_reduction(&tm, 1, 1, normed).map_err(|e| e.to_string())?;
        let out = escalating_bisim(&inst.pda, &inst.left, &inst.right, 16, 128, DEFAULT_NODE_BUDGET)
            .map_err(|e| e.to_string())?;
        ensure(out.closed, || format!("{name}: {} at cap {} not closed", out.verdict, out.cap))?;
        let ok = if expect {
            out.verdict.is_bisimilar()
        } else {
            out.verdict.is_not_bisimilar()
        };
        ensure(ok, || format!("{name}: got {}", out.verdict))?;
        if normed {
            for root in [&inst.left, &inst.right] {
                let nd = check_normed(&inst.pda, root, out.cap).map_err(|e| e.to_string())?;
                ensure(nd == Normedness::Normed, || format!("{name}: {root} is {nd:?}"))?;
            }
        }
        notes.push(format!("{name} {} at cap {}", out.verdict, out.cap));
    }
    if normed {
        notes.push("both roots normed".into());
    }
    Ok(notes.join(", "))
}

fn successor_property() -> Outcome {
    let spec = samples::toy_dtm().unwrap();
    let enc = DtmEncoding::new(&spec, 1, 3).map_err(|e| e.to_string())?;
    let tm = enc.machine().map_err(|e| e.to_string())?;
    let all = spec.all_configs();
    let t2 = |z: &[bool]| -> Vec<String> {
        let idx: Vec<usize> = z
            .iter()
            .map(|&b| tm.t2().inputs().get_index_of(if b { "1" } else { "0" }).unwrap())
            .collect();
        tm.t2().run_indices(&idx).into_iter().map(|o| tm.t2().outputs()[o].clone()).collect()
    };
    let images: Vec<Vec<String>> = all.iter().map(|c| t2(&enc.encode(c))).collect();
    let mut mismatches = 0;
    let mut pairs = 0;
    for c in &all {
        let image = tm.image(&enc.encode(c));
        let succ = spec.successor(c);
        for (d, out) in all.iter().zip(&images) {
            if (image == *out) != (succ.as_ref() == Some(d)) {
                mismatches += 1;
            }
            pairs += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches over {pairs} pairs"))?;
    let ell = enc.ell();
    ensure(enc.encode(&spec.initial_config()) == vec![true; ell], || "enc(initial) is not 1^ell".into())?;
    ensure(enc.encode(&spec.accepting_config()) == vec![false; ell], || "enc(accepting) is not 0^ell".into())?;
    Ok(format!("0 mismatches over {pairs} pairs, ell = {ell}"))
}

/// Least-squares polynomial fit; returns the largest relative residual.
fn poly_fit_residual(xs: &[f64], ys: &[f64], degree: usize) -> f64 {
    let m = degree + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += x.powi((i + j) as i32);
            }
            a[i][m] += y * x.powi(i as i32);
        }
    }
    for col in 0..m {
        let piv = (col..m).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let coef: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let fit: f64 = coef.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum();
            (fit - y).abs() / y
        })
        .fold(0.0, f64::max)
}

fn rule_count_growth() -> Outcome {
    let mut counts = Vec::new();
    for n in 1..=6u32 {
        let ell = 1usize << n;
        let tm = stateless_machine(ell, ["x", "p"], ["p", "y"]).map_err(|e| e.to_string())?;
        let inst = build_reduction(&tm, 1, n, false).map_err(|e| e.to_string())?;
        counts.push(inst.pda.rules().len());
    }
    ensure(counts.windows(2).all(|w| w[0] < w[1]), || format!("counts {counts:?} do not grow"))?;
    let xs: Vec<f64> = (1..=6).map(f64::from).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let residual = poly_fit_residual(&xs, &ys, 3);
    ensure(residual < 0.05, || format!("cubic fit residual {:.2}% on {counts:?}", residual * 100.0))?;
    Ok(format!("rules {counts:?}, cubic fit residual {:.3}%", residual * 100.0))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("gadget truth tables", gadget_truth_tables, Duration::from_secs(1)),
        ("plus-one transducers brute force", plus_one_brute_force, Duration::from_secs(1)),
        ("testDec_0 exhaustive at n=2", test_dec_exhaustive, Duration::from_secs(30)),
        ("counter oracle suite", counter_suite, Duration::from_secs(1)),
        ("guarded pop determinism", guarded_pop_determinism, Duration::from_secs(60)),
        ("end-to-end at k=1, n=1", || end_to_end(false), Duration::from_secs(300)),
        ("normed end-to-end at k=1, n=1", || end_to_end(true), Duration::from_secs(600)),
        ("DTM successor property", successor_property, Duration::from_secs(30)),
        ("rule-count growth", rule_count_growth, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *limit => Err(format!("{detail}; over the {limit:?} limit")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}; {took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why}; {took:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
