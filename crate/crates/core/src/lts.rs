//! Pushdown systems and the labelled transition systems they induce.

use std::fmt;

use indexmap::IndexSet;

use crate::error::{Error, Result};

fn valid_token(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !c.is_control() && c != '|')
}

/// An action label of the induced LTS.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionLabel(String);

impl ActionLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !valid_token(&name) {
            return Err(Error::InvalidName(name));
        }
        Ok(Self(name))
    }

    /// Builds a label from a name known to be valid.
    ///
    /// # Panics
    /// Panics if the name is not a valid token.
    pub fn from_static(name: &str) -> Self {
        Self::new(name).expect("invalid action label")
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A stack symbol. Symbols named `0_l` or `1_l` carry the level tag `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackSymbol {
    name: String,
    level: Option<u32>,
}

impl StackSymbol {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !valid_token(&name) {
            return Err(Error::InvalidName(name));
        }
        let level = parse_level(&name);
        Ok(Self { name, level })
    }

    /// The level-tagged symbol `bit_level`.
    pub fn omega(bit: bool, level: u32) -> Self {
        Self {
            name: format!("{}_{}", u8::from(bit), level),
            level: Some(level),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    /// The bit of a level-tagged symbol.
    pub fn bit(&self) -> Option<bool> {
        self.level.map(|_| self.name.starts_with('1'))
    }
}

fn parse_level(name: &str) -> Option<u32> {
    let rest = name.strip_prefix('0').or_else(|| name.strip_prefix('1'))?;
    let digits = rest.strip_prefix('_')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

impl fmt::Display for StackSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Which member of a state pair a control state is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// The bullet sits left of the name; written `.name`.
    Left,
    /// The bullet sits right of the name; written `name.`.
    Right,
    Plain,
}

/// A control state. The textual form is `.name`, `name.` or `name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ControlState {
    polarity: Polarity,
    name: String,
}

impl ControlState {
    pub fn new(polarity: Polarity, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !valid_token(&name) || name.starts_with('.') || name.ends_with('.') {
            return Err(Error::InvalidName(name));
        }
        Ok(Self { polarity, name })
    }

    pub fn left(name: impl Into<String>) -> Result<Self> {
        Self::new(Polarity::Left, name)
    }

    pub fn right(name: impl Into<String>) -> Result<Self> {
        Self::new(Polarity::Right, name)
    }

    pub fn plain(name: impl Into<String>) -> Result<Self> {
        Self::new(Polarity::Plain, name)
    }

    /// Parses the textual form.
    pub fn parse(token: &str) -> Result<Self> {
        if let Some(rest) = token.strip_prefix('.') {
            Self::new(Polarity::Left, rest)
        } else if let Some(rest) = token.strip_suffix('.') {
            Self::new(Polarity::Right, rest)
        } else {
            Self::new(Polarity::Plain, token)
        }
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The same name with another polarity.
    pub fn with_polarity(&self, polarity: Polarity) -> Self {
        Self {
            polarity,
            name: self.name.clone(),
        }
    }
}

impl fmt::Display for ControlState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::Left => write!(f, ".{}", self.name),
            Polarity::Right => write!(f, "{}.", self.name),
            Polarity::Plain => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Internal,
    Push(StackSymbol),
    Pop(StackSymbol),
}

/// A pushdown rule: `p -a-> q`, `p -a-> q σ` or `p σ -a-> q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub source: ControlState,
    pub action: ActionLabel,
    pub target: ControlState,
    pub kind: RuleKind,
}

impl Rule {
    pub fn internal(source: ControlState, action: ActionLabel, target: ControlState) -> Self {
        Self {
            source,
            action,
            target,
            kind: RuleKind::Internal,
        }
    }

    pub fn push(
        source: ControlState,
        action: ActionLabel,
        target: ControlState,
        pushed: StackSymbol,
    ) -> Self {
        Self {
            source,
            action,
            target,
            kind: RuleKind::Push(pushed),
        }
    }

    pub fn pop(
        source: ControlState,
        popped: StackSymbol,
        action: ActionLabel,
        target: ControlState,
    ) -> Self {
        Self {
            source,
            action,
            target,
            kind: RuleKind::Pop(popped),
        }
    }

    pub fn popped(&self) -> Option<&StackSymbol> {
        match &self.kind {
            RuleKind::Pop(s) => Some(s),
            _ => None,
        }
    }

    pub fn pushed(&self) -> Option<&StackSymbol> {
        match &self.kind {
            RuleKind::Push(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RuleKind::Internal => {
                write!(f, "internal {} {} {}", self.source, self.action, self.target)
            }
            RuleKind::Push(s) => write!(
                f,
                "push {} {} {} {}",
                self.source, self.action, self.target, s
            ),
            RuleKind::Pop(s) => {
                write!(f, "pop {} {} {} {}", self.source, s, self.action, self.target)
            }
        }
    }
}

/// Rules of one control state, by index.
#[derive(Debug, Clone, Default)]
pub(crate) struct StateRules {
    pub internal: Vec<(u32, u32)>,
    pub push: Vec<(u32, u32, u32)>,
    /// `(popped, action, target)`, sorted by popped symbol.
    pub pop: Vec<(u32, u32, u32)>,
}

impl StateRules {
    pub fn pops_of(&self, sym: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let start = self.pop.partition_point(|r| r.0 < sym);
        self.pop[start..]
            .iter()
            .take_while(move |r| r.0 == sym)
            .map(|r| (r.1, r.2))
    }
}

/// An ε-free pushdown system.
#[derive(Debug, Clone)]
pub struct Pda {
    states: IndexSet<ControlState>,
    stack_alphabet: IndexSet<StackSymbol>,
    actions: IndexSet<ActionLabel>,
    rules: IndexSet<Rule>,
    compiled: Vec<StateRules>,
}

impl Pda {
    /// Builds a PDA, rejecting rules that mention undeclared names.
    pub fn new(
        states: IndexSet<ControlState>,
        stack_alphabet: IndexSet<StackSymbol>,
        actions: IndexSet<ActionLabel>,
        rules: impl IntoIterator<Item = Rule>,
    ) -> Result<Self> {
        let rules: IndexSet<Rule> = rules.into_iter().collect();
        let mut compiled = vec![StateRules::default(); states.len()];
        let state_idx = |s: &ControlState| {
            states.get_index_of(s).ok_or_else(|| Error::Undeclared {
                kind: "state",
                name: s.to_string(),
            })
        };
        let sym_idx = |s: &StackSymbol| {
            stack_alphabet
                .get_index_of(s)
                .ok_or_else(|| Error::Undeclared {
                    kind: "stack symbol",
                    name: s.to_string(),
                })
        };
        for rule in &rules {
            let src = state_idx(&rule.source)?;
            let dst = state_idx(&rule.target)? as u32;
            let act = actions
                .get_index_of(&rule.action)
                .ok_or_else(|| Error::Undeclared {
                    kind: "action",
                    name: rule.action.to_string(),
                })? as u32;
            let entry = &mut compiled[src];
            match &rule.kind {
                RuleKind::Internal => entry.internal.push((act, dst)),
                RuleKind::Push(s) => entry.push.push((act, dst, sym_idx(s)? as u32)),
                RuleKind::Pop(s) => entry.pop.push((sym_idx(s)? as u32, act, dst)),
            }
        }
        for entry in &mut compiled {
            entry.pop.sort_unstable();
        }
        Ok(Self {
            states,
            stack_alphabet,
            actions,
            rules,
            compiled,
        })
    }

    pub fn states(&self) -> &IndexSet<ControlState> {
        &self.states
    }

    pub fn stack_alphabet(&self) -> &IndexSet<StackSymbol> {
        &self.stack_alphabet
    }

    pub fn actions(&self) -> &IndexSet<ActionLabel> {
        &self.actions
    }

    pub fn rules(&self) -> &IndexSet<Rule> {
        &self.rules
    }

    /// `|Γ| + |Act| + |rules|`.
    pub fn size(&self) -> usize {
        self.stack_alphabet.len() + self.actions.len() + self.rules.len()
    }

    pub(crate) fn compiled(&self) -> &[StateRules] {
        &self.compiled
    }

    pub(crate) fn state_index(&self, s: &ControlState) -> Option<u32> {
        self.states.get_index_of(s).map(|i| i as u32)
    }

    pub(crate) fn symbol_index(&self, s: &StackSymbol) -> Option<u32> {
        self.stack_alphabet.get_index_of(s).map(|i| i as u32)
    }

    pub(crate) fn state_at(&self, i: u32) -> &ControlState {
        &self.states[i as usize]
    }

    pub(crate) fn symbol_at(&self, i: u32) -> &StackSymbol {
        &self.stack_alphabet[i as usize]
    }

    pub(crate) fn action_at(&self, i: u32) -> &ActionLabel {
        &self.actions[i as usize]
    }

    /// Checks that every symbol of the configuration is declared.
    pub fn check_config(&self, c: &Config) -> Result<()> {
        if self.state_index(&c.state).is_none() {
            return Err(Error::Undeclared {
                kind: "state",
                name: c.state.to_string(),
            });
        }
        for s in &c.stack {
            if self.symbol_index(s).is_none() {
                return Err(Error::Undeclared {
                    kind: "stack symbol",
                    name: s.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Accumulates rules and declares every name they mention.
#[derive(Debug, Clone, Default)]
pub struct PdaBuilder {
    states: IndexSet<ControlState>,
    stack_alphabet: IndexSet<StackSymbol>,
    actions: IndexSet<ActionLabel>,
    rules: IndexSet<Rule>,
}

impl PdaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_state(&mut self, s: ControlState) -> &mut Self {
        self.states.insert(s);
        self
    }

    pub fn declare_symbol(&mut self, s: StackSymbol) -> &mut Self {
        self.stack_alphabet.insert(s);
        self
    }

    pub fn declare_action(&mut self, a: ActionLabel) -> &mut Self {
        self.actions.insert(a);
        self
    }

    pub fn add_rule(&mut self, rule: Rule) -> &mut Self {
        self.states.insert(rule.source.clone());
        self.states.insert(rule.target.clone());
        self.actions.insert(rule.action.clone());
        match &rule.kind {
            RuleKind::Internal => {}
            RuleKind::Push(s) | RuleKind::Pop(s) => {
                self.stack_alphabet.insert(s.clone());
            }
        }
        self.rules.insert(rule);
        self
    }

    pub fn extend(&mut self, rules: impl IntoIterator<Item = Rule>) -> &mut Self {
        for r in rules {
            self.add_rule(r);
        }
        self
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn build(self) -> Pda {
        Pda::new(self.states, self.stack_alphabet, self.actions, self.rules)
            .expect("builder declares every name it uses")
    }
}

/// A configuration: control state and stack, top first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub state: ControlState,
    pub stack: Vec<StackSymbol>,
}

impl Config {
    pub fn new(state: ControlState, stack: Vec<StackSymbol>) -> Self {
        Self { state, stack }
    }

    /// Parses `<state> | <sym> <sym> ...`; the bar and stack may be omitted.
    pub fn parse(text: &str) -> Result<Self> {
        let (head, tail) = match text.split_once('|') {
            Some((h, t)) => (h, t),
            None => (text, ""),
        };
        let mut words = head.split_whitespace();
        let state = words.next().ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            message: "configuration needs a control state".into(),
        })?;
        if let Some(extra) = words.next() {
            return Err(Error::Parse {
                line: 1,
                col: text.find(extra).map_or(1, |p| p + 1),
                message: format!("unexpected `{extra}` before `|`"),
            });
        }
        let state = ControlState::parse(state)?;
        let stack = tail
            .split_whitespace()
            .map(StackSymbol::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { state, stack })
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |", self.state)?;
        for s in &self.stack {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

/// All one-step successors of `c`, in rule order without duplicates.
pub fn step(pda: &Pda, c: &Config) -> Vec<(ActionLabel, Config)> {
    let Some(si) = pda.state_index(&c.state) else {
        return Vec::new();
    };
    let rules = &pda.compiled()[si as usize];
    let mut out: IndexSet<(ActionLabel, Config)> = IndexSet::new();
    for &(a, t) in &rules.internal {
        out.insert((
            pda.action_at(a).clone(),
            Config::new(pda.state_at(t).clone(), c.stack.clone()),
        ));
    }
    for &(a, t, s) in &rules.push {
        let mut stack = Vec::with_capacity(c.stack.len() + 1);
        stack.push(pda.symbol_at(s).clone());
        stack.extend_from_slice(&c.stack);
        out.insert((
            pda.action_at(a).clone(),
            Config::new(pda.state_at(t).clone(), stack),
        ));
    }
    if let Some(top) = c.stack.first().and_then(|s| pda.symbol_index(s)) {
        for (a, t) in rules.pops_of(top) {
            out.insert((
                pda.action_at(a).clone(),
                Config::new(pda.state_at(t).clone(), c.stack[1..].to_vec()),
            ));
        }
    }
    out.into_iter().collect()
}

/// An explicit finite LTS.
#[derive(Debug, Clone, Default)]
pub struct FiniteLts {
    states: IndexSet<String>,
    edges: IndexSet<(usize, ActionLabel, usize)>,
}

impl FiniteLts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: &str) -> usize {
        self.states.insert_full(name.to_string()).0
    }

    pub fn add_edge(&mut self, from: &str, action: &str, to: &str) -> Result<()> {
        let a = ActionLabel::new(action)?;
        let f = self.add_state(from);
        let t = self.add_state(to);
        self.edges.insert((f, a, t));
        Ok(())
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.get_index_of(name)
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &(usize, ActionLabel, usize)> {
        self.edges.iter()
    }
}
