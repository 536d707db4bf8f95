//! Macro rules and the forcing gadgets, expanded into concrete PDA rules.
//!
//! Fresh states are named after the macro's source with a `~` suffix, so
//! expansions of macros with distinct sources never share fresh states.

use std::collections::BTreeSet;

use indexmap::{IndexMap, IndexSet};

use crate::dfa::regex_to_min_dfa;
use crate::error::{Error, Result};
use crate::lts::{ActionLabel, ControlState, Pda, PdaBuilder, Polarity, Rule, StackSymbol};
use crate::regex::ClassRegex;
use crate::transducer::Transducer;

/// A state pair `(.name, name.)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StatePair(String);

impl StatePair {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        ControlState::left(name.as_str())?;
        Ok(Self(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn left(&self) -> ControlState {
        ControlState::left(self.0.as_str()).expect("validated")
    }

    pub fn right(&self) -> ControlState {
        ControlState::right(self.0.as_str()).expect("validated")
    }

    pub fn side(&self, polarity: Polarity) -> ControlState {
        ControlState::new(polarity, self.0.as_str()).expect("validated")
    }

    fn fresh(&self, suffix: &str) -> Self {
        Self(format!("{}~{suffix}", self.0))
    }
}

/// A target pair with the word pushed on entering it.
pub type ChoiceOption = (StatePair, Vec<StackSymbol>);

#[derive(Debug, Clone, PartialEq)]
pub enum MacroRule {
    /// `p σ -a_1…a_l-> q`: pop `σ`, then read the remaining actions.
    Chain {
        src: ControlState,
        popped: StackSymbol,
        actions: Vec<ActionLabel>,
        dst: ControlState,
    },
    /// `p L -T-> q`: pop the shortest prefix in `L` reading `# T(w) #`.
    GuardedPop {
        src: ControlState,
        guard: ClassRegex,
        trans: Transducer,
        dst: ControlState,
    },
    /// `q ↪ r σ_1…σ_l`.
    PairPush {
        src: StatePair,
        dst: StatePair,
        pushed: Vec<StackSymbol>,
    },
    /// Defender picks one option.
    DefChoice {
        src: StatePair,
        options: Vec<ChoiceOption>,
    },
    /// Attacker picks one option.
    AttChoice {
        src: StatePair,
        options: Vec<ChoiceOption>,
    },
}

impl MacroRule {
    /// Control states whose outgoing rules this macro defines.
    pub fn sources(&self) -> Vec<ControlState> {
        match self {
            Self::Chain { src, .. } | Self::GuardedPop { src, .. } => vec![src.clone()],
            Self::PairPush { src, .. }
            | Self::DefChoice { src, .. }
            | Self::AttChoice { src, .. } => vec![src.left(), src.right()],
        }
    }
}

/// Concrete rules of an expansion and the fresh states it introduced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Expansion {
    pub rules: Vec<Rule>,
    pub fresh: IndexSet<ControlState>,
}

impl Expansion {
    fn absorb(&mut self, other: Expansion) {
        self.rules.extend(other.rules);
        self.fresh.extend(other.fresh);
    }

    fn fresh_pair(&mut self, p: &StatePair) {
        self.fresh.insert(p.left());
        self.fresh.insert(p.right());
    }
}

fn act(name: &str) -> ActionLabel {
    ActionLabel::from_static(name)
}

/// Expands one macro. `alphabet` is the full stack alphabet, needed by
/// guarded pops.
pub fn expand(m: &MacroRule, alphabet: &IndexSet<StackSymbol>) -> Result<Expansion> {
    match m {
        MacroRule::Chain {
            src,
            popped,
            actions,
            dst,
        } => expand_chain(src, popped, actions, dst),
        MacroRule::GuardedPop {
            src,
            guard,
            trans,
            dst,
        } => expand_guarded_pop(src, guard, trans, dst, alphabet),
        MacroRule::PairPush { src, dst, pushed } => Ok(expand_pair_push(src, dst, pushed)),
        MacroRule::DefChoice { src, options } => expand_def_choice(src, options),
        MacroRule::AttChoice { src, options } => expand_att_choice(src, options),
    }
}

fn fresh_state(base: &ControlState, suffix: &str) -> ControlState {
    ControlState::new(base.polarity(), format!("{}~{suffix}", base.name())).expect("valid base")
}

pub fn expand_chain(
    src: &ControlState,
    popped: &StackSymbol,
    actions: &[ActionLabel],
    dst: &ControlState,
) -> Result<Expansion> {
    if actions.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mut out = Expansion::default();
    let l = actions.len();
    let mid: Vec<ControlState> = (1..l)
        .map(|i| fresh_state(src, &format!("{popped}~{i}")))
        .collect();
    let at = |i: usize| if i == l { dst.clone() } else { mid[i - 1].clone() };
    out.rules
        .push(Rule::pop(src.clone(), popped.clone(), actions[0].clone(), at(1)));
    for i in 1..l {
        out.rules
            .push(Rule::internal(at(i), actions[i].clone(), at(i + 1)));
    }
    out.fresh.extend(mid);
    Ok(out)
}

pub fn expand_guarded_pop(
    src: &ControlState,
    guard: &ClassRegex,
    trans: &Transducer,
    dst: &ControlState,
    alphabet: &IndexSet<StackSymbol>,
) -> Result<Expansion> {
    let dfa = regex_to_min_dfa(guard, alphabet).map_err(|e| match e {
        Error::UnknownSymbol(s) => {
            Error::GuardAlphabetMismatch(format!("guard symbol `{s}` is not a stack symbol"))
        }
        other => other,
    })?;
    let input_of: Vec<usize> = alphabet
        .iter()
        .map(|s| {
            trans.inputs().get_index_of(s.name()).ok_or_else(|| {
                Error::GuardAlphabetMismatch(format!("transducer has no input `{s}`"))
            })
        })
        .collect::<Result<_>>()?;
    let outputs: Vec<ActionLabel> = trans
        .outputs()
        .iter()
        .map(|o| ActionLabel::new(o.as_str()))
        .collect::<Result<_>>()?;
    let hash = act("#");
    let name = |(a, t): (usize, usize)| fresh_state(src, &format!("g{a},{t}"));

    let mut out = Expansion::default();
    let mut product: IndexSet<(usize, usize)> = IndexSet::new();
    product.insert((dfa.initial(), trans.initial()));
    out.rules
        .push(Rule::internal(src.clone(), hash.clone(), name(product[0])));
    let mut i = 0;
    while i < product.len() {
        let (a, t) = product[i];
        let here = name((a, t));
        out.fresh.insert(here.clone());
        if dfa.is_final(a) {
            out.rules
                .push(Rule::internal(here, hash.clone(), dst.clone()));
        } else {
            for (si, sym) in alphabet.iter().enumerate() {
                let (rt, word) = trans.transition(t, input_of[si]);
                let next = (dfa.next(a, si), rt);
                product.insert(next);
                let actions: Vec<ActionLabel> = word.iter().map(|&o| outputs[o].clone()).collect();
                out.absorb(expand_chain(&here, sym, &actions, &name(next))?);
            }
        }
        i += 1;
    }
    Ok(out)
}

pub fn expand_pair_push(src: &StatePair, dst: &StatePair, pushed: &[StackSymbol]) -> Expansion {
    let mut out = Expansion::default();
    let l = pushed.len();
    // pairs[i] is q_i; q_l is the source.
    let pairs: Vec<StatePair> = (0..l).map(|i| src.fresh(&format!("p{i}"))).collect();
    let at = |i: usize| if i == l { src.clone() } else { pairs[i].clone() };
    for pol in [Polarity::Left, Polarity::Right] {
        for i in (1..=l).rev() {
            out.rules.push(Rule::push(
                at(i).side(pol),
                act("a"),
                at(i - 1).side(pol),
                pushed[i - 1].clone(),
            ));
        }
        out.rules
            .push(Rule::internal(at(0).side(pol), act("a"), dst.side(pol)));
    }
    for p in &pairs {
        out.fresh_pair(p);
    }
    out
}

/// A gadget edge `from -x-> target·w`, where words longer than one symbol
/// enter a fresh pair that pushes the rest.
fn gadget_edge(
    out: &mut Expansion,
    from: ControlState,
    x: &str,
    (target, word): &ChoiceOption,
    pol: Polarity,
    staging: &StatePair,
) {
    match word.len() {
        0 => out
            .rules
            .push(Rule::internal(from, act(x), target.side(pol))),
        1 => out
            .rules
            .push(Rule::push(from, act(x), target.side(pol), word[0].clone())),
        n => out.rules.push(Rule::push(
            from,
            act(x),
            staging.side(pol),
            word[n - 1].clone(),
        )),
    }
}

fn stage_long_options(out: &mut Expansion, src: &StatePair, options: &[ChoiceOption; 2]) -> [StatePair; 2] {
    let mut staging = [src.fresh("o1"), src.fresh("o2")];
    for (i, (target, word)) in options.iter().enumerate() {
        if word.len() >= 2 {
            out.fresh_pair(&staging[i]);
            out.absorb(expand_pair_push(&staging[i], target, &word[..word.len() - 1]));
        } else {
            staging[i] = target.clone();
        }
    }
    staging
}

/// Or-gadget wiring between `src` and two options.
fn or_gadget(src: &StatePair, options: [ChoiceOption; 2]) -> Expansion {
    let mut out = Expansion::default();
    let stage = stage_long_options(&mut out, src, &options);
    let u: Vec<ControlState> = (1..=3)
        .map(|i| ControlState::plain(format!("{}~u{i}", src.name())).expect("valid"))
        .collect();
    let (l, r) = (Polarity::Left, Polarity::Right);
    for ui in &u {
        out.rules
            .push(Rule::internal(src.left(), act("a"), ui.clone()));
    }
    for ui in &u[1..] {
        out.rules
            .push(Rule::internal(src.right(), act("a"), ui.clone()));
    }
    let [t, t2] = &options;
    gadget_edge(&mut out, u[0].clone(), "a", t, l, &stage[0]);
    gadget_edge(&mut out, u[0].clone(), "b", t2, l, &stage[1]);
    gadget_edge(&mut out, u[1].clone(), "a", t, l, &stage[0]);
    gadget_edge(&mut out, u[1].clone(), "b", t2, r, &stage[1]);
    gadget_edge(&mut out, u[2].clone(), "a", t, r, &stage[0]);
    gadget_edge(&mut out, u[2].clone(), "b", t2, l, &stage[1]);
    out.fresh.extend(u);
    out
}

/// And-gadget wiring between `src` and two options.
fn and_gadget(src: &StatePair, options: [ChoiceOption; 2]) -> Expansion {
    let mut out = Expansion::default();
    let stage = stage_long_options(&mut out, src, &options);
    let [t, t2] = &options;
    for pol in [Polarity::Left, Polarity::Right] {
        gadget_edge(&mut out, src.side(pol), "a", t, pol, &stage[0]);
        gadget_edge(&mut out, src.side(pol), "b", t2, pol, &stage[1]);
    }
    out
}

fn expand_choice(
    src: &StatePair,
    options: &[ChoiceOption],
    gadget: fn(&StatePair, [ChoiceOption; 2]) -> Expansion,
) -> Result<Expansion> {
    match options {
        [] => Err(Error::EmptyOptions),
        [(dst, word)] => Ok(expand_pair_push(src, dst, word)),
        [first, second] => Ok(gadget(src, [first.clone(), second.clone()])),
        [first, rest @ ..] => {
            let mut out = Expansion::default();
            let mut here = src.clone();
            let mut head = first.clone();
            for (j, opt) in rest.iter().enumerate() {
                if j + 1 == rest.len() {
                    out.absorb(gadget(&here, [head.clone(), opt.clone()]));
                    break;
                }
                let next = src.fresh(&format!("d{}", j + 1));
                out.absorb(gadget(&here, [head.clone(), (next.clone(), Vec::new())]));
                out.fresh_pair(&next);
                here = next;
                head = opt.clone();
            }
            Ok(out)
        }
    }
}

pub fn expand_def_choice(src: &StatePair, options: &[ChoiceOption]) -> Result<Expansion> {
    expand_choice(src, options, or_gadget)
}

pub fn expand_att_choice(src: &StatePair, options: &[ChoiceOption]) -> Result<Expansion> {
    expand_choice(src, options, and_gadget)
}

/// Expands a list of macros into one PDA, checking that no two macros share
/// a source and that fresh states do not clash with named ones.
pub fn expand_all(
    macros: &[MacroRule],
    alphabet: &IndexSet<StackSymbol>,
    extra_rules: &[Rule],
) -> Result<(Pda, Vec<Expansion>)> {
    let mut sources: BTreeSet<ControlState> = BTreeSet::new();
    for m in macros {
        for s in m.sources() {
            if !sources.insert(s.clone()) {
                return Err(Error::DuplicateSource(s.to_string()));
            }
        }
    }
    let mut builder = PdaBuilder::new();
    for s in alphabet {
        builder.declare_symbol(s.clone());
    }
    let mut seen_fresh: IndexMap<ControlState, usize> = IndexMap::new();
    let mut expansions = Vec::with_capacity(macros.len());
    for (i, m) in macros.iter().enumerate() {
        let e = expand(m, alphabet)?;
        for f in &e.fresh {
            if sources.contains(f) || seen_fresh.insert(f.clone(), i).is_some() {
                return Err(Error::Invalid(format!("fresh state `{f}` clashes")));
            }
        }
        builder.extend(e.rules.iter().cloned());
        expansions.push(e);
    }
    builder.extend(extra_rules.iter().cloned());
    for m in macros {
        for s in m.sources() {
            builder.declare_state(s);
        }
    }
    Ok((builder.build(), expansions))
}
