//! Predicate abstraction of concrete observations into symbolic bit-vector
//! states, plus the domain rules deciding which states and transitions are
//! semantically valid.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::expr::{atom_key, Expr, ExprError, Value, VarKind};

/// Largest supported number of predicates.
pub const MAX_PREDICATES: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbstractionError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("malformed expression `{text}`: {source}")]
    MalformedExpression { text: String, source: ExprError },
    #[error("invalid abstraction spec: {0}")]
    InvalidSpec(String),
    #[error("state space too large: {0} predicates (limit {MAX_PREDICATES})")]
    StateSpaceTooLarge(usize),
    #[error("step {index}: {source}")]
    AtStep {
        index: usize,
        source: Box<AbstractionError>,
    },
}

impl From<ExprError> for AbstractionError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::UnknownVariable(v) => AbstractionError::UnknownVariable(v),
            ExprError::TypeMismatch(m) => AbstractionError::TypeMismatch(m),
            e @ ExprError::Malformed { .. } => AbstractionError::MalformedExpression {
                text: String::new(),
                source: e,
            },
        }
    }
}

/// One observation of the agent and its environment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConcreteState {
    pub variables: BTreeMap<String, Value>,
}

impl ConcreteState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.variables.insert(name.to_string(), value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.variables.get(name)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}
impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}
impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}
impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

/// A named boolean condition over observation variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub name: String,
    /// Canonical key used to refer to this predicate's bit from rules and labels.
    pub key: String,
    pub expr: Expr,
}

/// Abstract state: either a bit-vector of predicate truth values, or one of
/// the declared terminal markers.
///
/// The derived ordering puts bit-vectors in ascending id order before
/// terminals in declaration order, which is the canonical state order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolicState {
    Bits { mask: u32, width: u8 },
    Terminal { tag: u16, width: u8 },
}

impl SymbolicState {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &b)| m | ((b as u32) << i));
        SymbolicState::Bits {
            mask,
            width: bits.len() as u8,
        }
    }

    /// Inverse of [`id`](Self::id).
    pub fn from_id(id: u64, width: usize, n_terminals: usize) -> Option<Self> {
        let base = 1u64 << width;
        if id < base {
            Some(SymbolicState::Bits {
                mask: id as u32,
                width: width as u8,
            })
        } else if id - base < n_terminals as u64 {
            Some(SymbolicState::Terminal {
                tag: (id - base) as u16,
                width: width as u8,
            })
        } else {
            None
        }
    }

    /// Little-endian bit encoding; terminals follow at `2^k + tag_index`.
    pub fn id(&self) -> u64 {
        match *self {
            SymbolicState::Bits { mask, .. } => mask as u64,
            SymbolicState::Terminal { tag, width } => (1u64 << width) + tag as u64,
        }
    }

    pub fn width(&self) -> usize {
        match *self {
            SymbolicState::Bits { width, .. } | SymbolicState::Terminal { width, .. } => {
                width as usize
            }
        }
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, SymbolicState::Terminal { .. })
    }

    pub fn terminal_tag(&self) -> Option<usize> {
        match *self {
            SymbolicState::Terminal { tag, .. } => Some(tag as usize),
            _ => None,
        }
    }

    /// Truth of predicate `i`; always false for terminals.
    pub fn bit(&self, i: usize) -> bool {
        match *self {
            SymbolicState::Bits { mask, .. } => mask >> i & 1 == 1,
            SymbolicState::Terminal { .. } => false,
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.width()).map(|i| self.bit(i)).collect()
    }
}

impl fmt::Display for SymbolicState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicState::Bits { .. } => {
                f.write_str("<")?;
                for (i, b) in self.bits().into_iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(if b { "1" } else { "0" })?;
                }
                f.write_str(">")
            }
            SymbolicState::Terminal { tag, .. } => write!(f, "terminal#{tag}"),
        }
    }
}

/// Declared variable: kind and optional default used when an observation
/// omits it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariableDecl {
    Kind(VarKind),
    WithDefault {
        kind: VarKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<Value>,
    },
}

impl VariableDecl {
    pub fn kind(&self) -> VarKind {
        match self {
            VariableDecl::Kind(k) | VariableDecl::WithDefault { kind: k, .. } => *k,
        }
    }

    pub fn default_value(&self) -> Option<&Value> {
        match self {
            VariableDecl::WithDefault { default, .. } => default.as_ref(),
            VariableDecl::Kind(_) => None,
        }
    }
}

/// On-disk (JSON) form of an abstraction spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default)]
    pub variables: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub predicates: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    pub terminals: Vec<String>,
    #[serde(default)]
    pub state_rules: Vec<String>,
    #[serde(default)]
    pub transition_rules: Vec<String>,
    /// Optional display names keyed by state id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub state_labels: BTreeMap<u64, String>,
}

impl SpecFile {
    pub fn variable(mut self, name: &str, kind: VarKind) -> Self {
        self.variables
            .insert(name.into(), serde_json::to_value(kind).unwrap());
        self
    }

    pub fn variable_with_default(mut self, name: &str, kind: VarKind, default: Value) -> Self {
        let decl = VariableDecl::WithDefault {
            kind,
            default: Some(default),
        };
        self.variables
            .insert(name.into(), serde_json::to_value(decl).unwrap());
        self
    }

    pub fn predicate(mut self, name: &str, expr: &str) -> Self {
        self.predicates.insert(name.into(), expr.into());
        self
    }

    pub fn terminal(mut self, tag: &str) -> Self {
        self.terminals.push(tag.into());
        self
    }

    pub fn state_rule(mut self, rule: &str) -> Self {
        self.state_rules.push(rule.into());
        self
    }

    pub fn transition_rule(mut self, rule: &str) -> Self {
        self.transition_rules.push(rule.into());
        self
    }

    pub fn label(mut self, id: u64, name: &str) -> Self {
        self.state_labels.insert(id, name.into());
        self
    }

    pub fn build(self) -> Result<AbstractionSpec, AbstractionError> {
        AbstractionSpec::new(self)
    }
}

/// Validated abstraction: ordered predicates, terminal tags and validity rules.
#[derive(Debug, Clone)]
pub struct AbstractionSpec {
    file: SpecFile,
    variables: BTreeMap<String, VariableDecl>,
    predicates: Vec<Predicate>,
    state_rules: Vec<Expr>,
    transition_rules: Vec<Expr>,
    bit_index: HashMap<String, usize>,
}

fn parse_rule(text: &str) -> Result<Expr, AbstractionError> {
    Expr::parse(text).map_err(|source| AbstractionError::MalformedExpression {
        text: text.to_string(),
        source,
    })
}

impl AbstractionSpec {
    pub fn builder() -> SpecFile {
        SpecFile::default()
    }

    pub fn new(file: SpecFile) -> Result<Self, AbstractionError> {
        let invalid = |m: String| Err(AbstractionError::InvalidSpec(m));

        let mut variables = BTreeMap::new();
        for (name, raw) in &file.variables {
            let decl: VariableDecl = match serde_json::from_value(raw.clone()) {
                Ok(d) => d,
                Err(e) => return invalid(format!("variable `{name}`: {e}")),
            };
            if let Some(default) = decl.default_value() {
                if !decl.kind().accepts(default.kind()) {
                    return invalid(format!(
                        "variable `{name}`: default of kind {} for declared kind {}",
                        default.kind(),
                        decl.kind()
                    ));
                }
            }
            variables.insert(name.clone(), decl);
        }

        if file.predicates.len() > MAX_PREDICATES {
            return Err(AbstractionError::StateSpaceTooLarge(file.predicates.len()));
        }
        let mut predicates = Vec::with_capacity(file.predicates.len());
        let mut bit_index = HashMap::new();
        for (name, raw) in &file.predicates {
            let Some(text) = raw.as_str() else {
                return invalid(format!("predicate `{name}` must be an expression string"));
            };
            let expr = parse_rule(text)?;
            for (var, primed) in expr.variables() {
                if primed {
                    return invalid(format!("predicate `{name}` uses a primed variable"));
                }
                if !variables.contains_key(var) {
                    return invalid(format!("predicate `{name}` references undeclared `{var}`"));
                }
            }
            let key = atom_key(name).unwrap_or_else(|| name.clone());
            if bit_index.insert(key.clone(), predicates.len()).is_some() {
                return invalid(format!("duplicate predicate `{name}`"));
            }
            predicates.push(Predicate {
                name: name.clone(),
                key,
                expr,
            });
        }

        let mut tags = HashSet::new();
        for tag in &file.terminals {
            if !tags.insert(tag) {
                return invalid(format!("duplicate terminal `{tag}`"));
            }
        }

        let state_rules = file
            .state_rules
            .iter()
            .map(|r| parse_rule(r))
            .collect::<Result<Vec<_>, _>>()?;
        let transition_rules = file
            .transition_rules
            .iter()
            .map(|r| parse_rule(r))
            .collect::<Result<Vec<_>, _>>()?;

        let spec = AbstractionSpec {
            file,
            variables,
            predicates,
            state_rules,
            transition_rules,
            bit_index,
        };
        // Rules are over booleans only, so one dry run on the all-false
        // state surfaces every reference and type error.
        let zero = SymbolicState::from_bits(&vec![false; spec.width()]);
        for (rule, text) in spec.state_rules.iter().zip(&spec.file.state_rules) {
            if rule.variables().iter().any(|(_, primed)| *primed) {
                return invalid(format!("state rule `{text}` uses a primed variable"));
            }
            spec.eval_over_bits(rule, &zero, &zero)
                .map_err(|e| AbstractionError::InvalidSpec(format!("state rule `{text}`: {e}")))?;
        }
        for (rule, text) in spec
            .transition_rules
            .iter()
            .zip(&spec.file.transition_rules)
        {
            spec.eval_over_bits(rule, &zero, &zero).map_err(|e| {
                AbstractionError::InvalidSpec(format!("transition rule `{text}`: {e}"))
            })?;
        }
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, AbstractionError> {
        let file: SpecFile =
            serde_json::from_str(text).map_err(|e| AbstractionError::InvalidSpec(e.to_string()))?;
        Self::new(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("spec serializes")
    }

    pub fn file(&self) -> &SpecFile {
        &self.file
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(&self.file).expect("spec serializes");
        hex_digest(compact.as_bytes())
    }

    pub fn width(&self) -> usize {
        self.predicates.len()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn predicate_names(&self) -> Vec<String> {
        self.predicates.iter().map(|p| p.name.clone()).collect()
    }

    pub fn terminals(&self) -> &[String] {
        &self.file.terminals
    }

    pub fn state_labels(&self) -> &BTreeMap<u64, String> {
        &self.file.state_labels
    }

    pub fn variables(&self) -> &BTreeMap<String, VariableDecl> {
        &self.variables
    }

    pub fn terminal(&self, tag: &str) -> Option<SymbolicState> {
        let idx = self.file.terminals.iter().position(|t| t == tag)?;
        Some(SymbolicState::Terminal {
            tag: idx as u16,
            width: self.width() as u8,
        })
    }

    fn lookup_var(&self, state: &ConcreteState, key: &str) -> Result<Value, ExprError> {
        let decl = self
            .variables
            .get(key)
            .ok_or_else(|| ExprError::UnknownVariable(key.to_string()))?;
        let value = match state.get(key) {
            Some(v) => v.clone(),
            None => decl
                .default_value()
                .cloned()
                .ok_or_else(|| ExprError::UnknownVariable(key.to_string()))?,
        };
        if !decl.kind().accepts(value.kind()) {
            return Err(ExprError::TypeMismatch(format!(
                "variable `{key}` declared {} but observed {}",
                decl.kind(),
                value.kind()
            )));
        }
        Ok(value)
    }

    fn eval_over_bits(
        &self,
        rule: &Expr,
        current: &SymbolicState,
        next: &SymbolicState,
    ) -> Result<bool, ExprError> {
        rule.eval_bool(&|key: &str, primed: bool| {
            let idx = *self
                .bit_index
                .get(key)
                .ok_or_else(|| ExprError::UnknownVariable(key.to_string()))?;
            let s = if primed { next } else { current };
            Ok(Value::Bool(s.bit(idx)))
        })
    }

    /// Evaluates a predicate-bit expression on `state`. Terminal tag names
    /// are usable as atoms and hold only on their own terminal state.
    pub fn eval_label(&self, expr: &Expr, state: &SymbolicState) -> Result<bool, ExprError> {
        label_eval(
            expr,
            state,
            |k| self.bit_index.get(k).copied(),
            |k| self.file.terminals.iter().position(|t| t == k),
        )
    }
}

pub(crate) fn label_eval(
    expr: &Expr,
    state: &SymbolicState,
    bit_of: impl Fn(&str) -> Option<usize>,
    terminal_of: impl Fn(&str) -> Option<usize>,
) -> Result<bool, ExprError> {
    expr.eval_bool(&|key: &str, primed: bool| {
        if primed {
            return Err(ExprError::TypeMismatch(format!(
                "primed `{key}'` is not allowed in a state label"
            )));
        }
        if let Some(tag) = terminal_of(key) {
            return Ok(Value::Bool(state.terminal_tag() == Some(tag)));
        }
        let idx = bit_of(key).ok_or_else(|| ExprError::UnknownVariable(key.to_string()))?;
        Ok(Value::Bool(!state.is_terminal() && state.bit(idx)))
    })
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Maps an observation to its predicate bit-vector.
pub fn abstract_state(
    state: &ConcreteState,
    spec: &AbstractionSpec,
) -> Result<SymbolicState, AbstractionError> {
    let mut mask = 0u32;
    for (i, p) in spec.predicates.iter().enumerate() {
        let lookup = |key: &str, _primed: bool| spec.lookup_var(state, key);
        if p.expr.eval_bool(&lookup)? {
            mask |= 1 << i;
        }
    }
    Ok(SymbolicState::Bits {
        mask,
        width: spec.width() as u8,
    })
}

/// Abstracts each element of `trace`. With `collapse`, runs of identical
/// consecutive states are reduced to one element.
pub fn abstract_trace(
    trace: &[ConcreteState],
    spec: &AbstractionSpec,
    collapse: bool,
) -> Result<Vec<SymbolicState>, AbstractionError> {
    let mut out: Vec<SymbolicState> = Vec::with_capacity(trace.len());
    for (index, state) in trace.iter().enumerate() {
        let s = abstract_state(state, spec).map_err(|e| AbstractionError::AtStep {
            index,
            source: Box::new(e),
        })?;
        if collapse && out.last() == Some(&s) {
            continue;
        }
        out.push(s);
    }
    Ok(out)
}

pub fn is_valid_state(s: &SymbolicState, spec: &AbstractionSpec) -> bool {
    if s.width() != spec.width() {
        return false;
    }
    if s.is_terminal() {
        return s.terminal_tag().unwrap() < spec.terminals().len();
    }
    spec.state_rules
        .iter()
        .all(|r| spec.eval_over_bits(r, s, s).unwrap_or(false))
}

/// Terminals only loop to themselves. Transitions into a terminal are not
/// constrained by the bit-level rules.
pub fn is_valid_transition(s: &SymbolicState, t: &SymbolicState, spec: &AbstractionSpec) -> bool {
    if s.is_terminal() {
        return s == t;
    }
    if t.is_terminal() {
        return true;
    }
    spec.transition_rules
        .iter()
        .all(|r| spec.eval_over_bits(r, s, t).unwrap_or(false))
}

/// Canonical ordered list of valid abstract states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    width: usize,
    predicate_names: Vec<String>,
    terminals: Vec<String>,
    states: Vec<SymbolicState>,
    labels: Vec<String>,
    index: HashMap<SymbolicState, usize>,
}

impl StateSpace {
    /// Builds a space from explicit parts. `states` must be sorted and
    /// of a common width.
    pub fn from_parts(
        predicate_names: Vec<String>,
        terminals: Vec<String>,
        states: Vec<SymbolicState>,
        labels: Vec<String>,
    ) -> Result<Self, AbstractionError> {
        let width = predicate_names.len();
        if width > MAX_PREDICATES {
            return Err(AbstractionError::StateSpaceTooLarge(width));
        }
        if labels.len() != states.len() {
            return Err(AbstractionError::InvalidSpec(
                "one label per state required".into(),
            ));
        }
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if s.width() != width || s.terminal_tag().is_some_and(|t| t >= terminals.len()) {
                return Err(AbstractionError::InvalidSpec(format!(
                    "state id {} does not fit {} predicates and {} terminals",
                    s.id(),
                    width,
                    terminals.len()
                )));
            }
            if i > 0 && states[i - 1] >= *s {
                return Err(AbstractionError::InvalidSpec(
                    "states must be unique and in ascending id order".into(),
                ));
            }
            index.insert(*s, i);
        }
        Ok(StateSpace {
            width,
            predicate_names,
            terminals,
            states,
            labels,
            index,
        })
    }

    /// `n` anonymous states (ids `0..n`) over `ceil(log2 n)` unnamed bits,
    /// for hand-written chains.
    pub fn anonymous(n: usize) -> Self {
        let width = (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize;
        let states = (0..n as u32)
            .map(|mask| SymbolicState::Bits {
                mask,
                width: width as u8,
            })
            .collect();
        Self::from_parts(
            (0..width).map(|i| format!("b{i}")).collect(),
            Vec::new(),
            states,
            (0..n).map(|i| format!("s{i}")).collect(),
        )
        .expect("anonymous space is well formed")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn states(&self) -> &[SymbolicState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> SymbolicState {
        self.states[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn predicate_names(&self) -> &[String] {
        &self.predicate_names
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn index_of(&self, s: &SymbolicState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn index_of_id(&self, id: u64) -> Option<usize> {
        let s = SymbolicState::from_id(id, self.width, self.terminals.len())?;
        self.index_of(&s)
    }

    /// Resolves a state given as a numeric id or a label.
    pub fn resolve(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.labels.iter().position(|l| l == name) {
            return Some(i);
        }
        name.parse::<u64>().ok().and_then(|id| self.index_of_id(id))
    }

    pub fn describe(&self, index: usize) -> String {
        describe_state(&self.states[index], &self.predicate_names, &self.terminals)
    }

    pub fn eval_label(&self, expr: &Expr, index: usize) -> Result<bool, ExprError> {
        let keys: Vec<String> = self
            .predicate_names
            .iter()
            .map(|n| atom_key(n).unwrap_or_else(|| n.clone()))
            .collect();
        label_eval(
            expr,
            &self.states[index],
            |k| keys.iter().position(|p| p == k),
            |k| self.terminals.iter().position(|t| t == k),
        )
    }

    pub fn same_states(&self, other: &StateSpace) -> bool {
        self.width == other.width
            && self.terminals.len() == other.terminals.len()
            && self.states == other.states
    }
}

/// All valid states of `spec`: bit-vectors in ascending id order, then
/// terminals in declaration order.
pub fn enumerate_state_space(spec: &AbstractionSpec) -> Result<StateSpace, AbstractionError> {
    let k = spec.width();
    if k > MAX_PREDICATES {
        return Err(AbstractionError::StateSpaceTooLarge(k));
    }
    let mut states: Vec<SymbolicState> = (0..1u32 << k)
        .map(|mask| SymbolicState::Bits {
            mask,
            width: k as u8,
        })
        .filter(|s| is_valid_state(s, spec))
        .collect();
    states.extend(
        (0..spec.terminals().len()).map(|tag| SymbolicState::Terminal {
            tag: tag as u16,
            width: k as u8,
        }),
    );
    let labels = states
        .iter()
        .map(|s| {
            spec.state_labels()
                .get(&s.id())
                .cloned()
                .unwrap_or_else(|| default_label(s, spec.terminals()))
        })
        .collect();
    StateSpace::from_parts(
        spec.predicate_names(),
        spec.terminals().to_vec(),
        states,
        labels,
    )
}

fn default_label(s: &SymbolicState, terminals: &[String]) -> String {
    match s.terminal_tag() {
        Some(t) => terminals[t].clone(),
        None => format!("s{}", s.id()),
    }
}

/// Distinct atomic conditions of `condition`, in left-to-right order, each
/// as a predicate named after its source text.
pub fn atoms_of_unsafe_condition(condition: &str) -> Result<Vec<Predicate>, AbstractionError> {
    let expr = parse_rule(condition)?;
    Ok(expr
        .atoms()
        .into_iter()
        .map(|atom| {
            let name = atom.to_string();
            let key = match &atom {
                Expr::Var { key, .. } => key.clone(),
                _ => name.clone(),
            };
            Predicate {
                name,
                key,
                expr: atom,
            }
        })
        .collect())
}

/// `name=true/false` for each predicate, or the terminal tag.
pub fn decode_lines(s: &SymbolicState, spec: &AbstractionSpec) -> Vec<String> {
    lines(s, &spec.predicate_names(), spec.terminals())
}

pub fn decode(s: &SymbolicState, spec: &AbstractionSpec) -> String {
    decode_lines(s, spec).join(", ")
}

fn lines(s: &SymbolicState, names: &[String], terminals: &[String]) -> Vec<String> {
    match s.terminal_tag() {
        Some(t) => vec![terminals
            .get(t)
            .cloned()
            .unwrap_or_else(|| format!("terminal#{t}"))],
        None => names
            .iter()
            .enumerate()
            .map(|(i, n)| format!("{n}={}", s.bit(i)))
            .collect(),
    }
}

pub(crate) fn describe_state(s: &SymbolicState, names: &[String], terminals: &[String]) -> String {
    lines(s, names, terminals).join(", ")
}
