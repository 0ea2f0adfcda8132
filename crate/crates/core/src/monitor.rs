//! Runtime monitor: abstracts each observation, looks up the precomputed
//! path probability of the current state, and decides whether to intervene.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::abstraction::{
    abstract_state, decode, enumerate_state_space, hex_digest, is_valid_state, AbstractionError,
    AbstractionSpec, ConcreteState, SymbolicState,
};
use crate::dtmc::Dtmc;
use crate::pctl::{path_probability, Bound, Labeling, PathFormula, PctlError, StateFormula};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonitorError {
    #[error("monitored property must be a single P operator, got `{0}`")]
    NotProbabilistic(String),
    #[error("model states do not match the abstraction's state space")]
    SpaceMismatch,
    #[error("observation abstracts to {0}, which is not a state of the model")]
    StateNotInModel(String),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Pctl(#[from] PctlError),
    #[error("line {line}: {message}")]
    BadObservation { line: usize, message: String },
    #[error("unknown terminal tag `{0}`")]
    UnknownTerminal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Intervention requested from the host when the property is violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Stop,
    Reflect,
    UserInspection,
    InvokeAction { name: String, parameters: Json },
}

impl Strategy {
    /// Short name as used on the command line: `stop`, `reflect`,
    /// `inspect` or `invoke:<action>`.
    pub fn name(&self) -> String {
        match self {
            Strategy::Stop => "stop".into(),
            Strategy::Reflect => "reflect".into(),
            Strategy::UserInspection => "inspect".into(),
            Strategy::InvokeAction { name, .. } => format!("invoke:{name}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stop" => Ok(Strategy::Stop),
            "reflect" => Ok(Strategy::Reflect),
            "inspect" => Ok(Strategy::UserInspection),
            _ => match s.strip_prefix("invoke:") {
                Some(name) if !name.is_empty() => Ok(Strategy::InvokeAction {
                    name: name.to_string(),
                    parameters: json!({}),
                }),
                _ => Err(format!(
                    "unknown strategy `{s}`; expected stop, reflect, inspect or invoke:<name>"
                )),
            },
        }
    }
}

pub struct MonitorConfig {
    pub property: StateFormula,
    pub labeling: Labeling,
    pub strategy: Strategy,
    pub spec: AbstractionSpec,
    pub model: Dtmc<f64>,
}

impl MonitorConfig {
    pub fn new(
        property: StateFormula,
        labeling: Labeling,
        strategy: Strategy,
        spec: AbstractionSpec,
        model: Dtmc<f64>,
    ) -> Result<Self, MonitorError> {
        if !matches!(property, StateFormula::Prob { .. }) {
            return Err(MonitorError::NotProbabilistic(property.to_string()));
        }
        let space = enumerate_state_space(&spec)?;
        if !space.same_states(model.space()) {
            return Err(MonitorError::SpaceMismatch);
        }
        Ok(MonitorConfig {
            property,
            labeling,
            strategy,
            spec,
            model,
        })
    }

    fn parts(&self) -> (Bound, f64, &PathFormula) {
        match &self.property {
            StateFormula::Prob { bound, theta, path } => (*bound, *theta, path),
            _ => unreachable!("checked in MonitorConfig::new"),
        }
    }

    pub fn bound(&self) -> Bound {
        self.parts().0
    }

    pub fn theta(&self) -> f64 {
        self.parts().1
    }

    /// Solves the path formula from scratch and returns the value at `index`.
    /// Used to cross-check the cache; the monitor itself never calls this.
    pub fn uncached_probability(&self, index: usize) -> Result<f64, MonitorError> {
        let (_, _, path) = self.parts();
        Ok(path_probability(&self.model, &self.labeling, path)?[index])
    }
}

/// Path probabilities of the monitored property for every state, from a
/// single solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachabilityCache {
    values: Vec<f64>,
    model_hash: String,
    property_text: String,
}

impl ReachabilityCache {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn built_from(&self) -> (&str, &str) {
        (&self.model_hash, &self.property_text)
    }
}

pub fn build_cache(config: &MonitorConfig) -> Result<ReachabilityCache, MonitorError> {
    let (_, _, path) = config.parts();
    let values = path_probability(&config.model, &config.labeling, path)?;
    Ok(ReachabilityCache {
        values,
        model_hash: config.model.content_hash(),
        property_text: config.property.to_string(),
    })
}

/// Why the monitor intervened.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    #[serde(skip)]
    pub state: SymbolicState,
    pub state_id: u64,
    pub state_label: String,
    pub decoded: String,
    pub probability: f64,
    pub bound: Bound,
    pub theta: f64,
    pub property_text: String,
    pub step_index: usize,
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: state {} ({}) has probability {:.4}, which violates the required {} {} of `{}`",
            self.step_index,
            self.state_label,
            self.decoded,
            self.probability,
            self.bound,
            self.theta,
            self.property_text
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum MonitorDecision {
    Continue,
    Enforce {
        strategy: Strategy,
        explanation: Explanation,
    },
}

impl MonitorDecision {
    pub fn is_enforce(&self) -> bool {
        matches!(self, MonitorDecision::Enforce { .. })
    }
}

/// Whether a cached probability violates `P⋈θ`.
pub fn violates(probability: f64, bound: Bound, theta: f64) -> bool {
    !bound.holds(&probability, &theta)
}

/// A single-threaded monitor over a shared configuration and cache.
pub struct Monitor {
    config: Arc<MonitorConfig>,
    cache: Arc<ReachabilityCache>,
    buffer: Vec<(ConcreteState, SymbolicState)>,
    tripped: Option<MonitorDecision>,
    steps: usize,
}

impl Monitor {
    pub fn new(config: MonitorConfig) -> Result<Self, MonitorError> {
        let cache = build_cache(&config)?;
        Ok(Self::with_cache(Arc::new(config), Arc::new(cache)))
    }

    /// Creates a monitor sharing an existing configuration and cache.
    pub fn with_cache(config: Arc<MonitorConfig>, cache: Arc<ReachabilityCache>) -> Self {
        Monitor {
            config,
            cache,
            buffer: Vec::new(),
            tripped: None,
            steps: 0,
        }
    }

    pub fn config(&self) -> &Arc<MonitorConfig> {
        &self.config
    }

    pub fn cache(&self) -> &Arc<ReachabilityCache> {
        &self.cache
    }

    pub fn is_tripped(&self) -> bool {
        self.tripped.is_some()
    }

    /// Clears the tripped state so monitoring can resume.
    pub fn acknowledge(&mut self) {
        self.tripped = None;
    }

    /// Observations that passed the check, in arrival order.
    pub fn trajectory(&self) -> &[(ConcreteState, SymbolicState)] {
        &self.buffer
    }

    /// Cached path probability and id of the state `s`.
    fn lookup(&self, s: &SymbolicState) -> Result<(usize, f64), MonitorError> {
        let index = self
            .config
            .model
            .space()
            .index_of(s)
            .filter(|_| is_valid_state(s, &self.config.spec))
            .ok_or_else(|| MonitorError::StateNotInModel(s.to_string()))?;
        Ok((index, self.cache.get(index)))
    }

    /// Steps on one stream message and reports the decision as a line
    /// record.
    pub fn record(&mut self, message: &Observation) -> Result<StreamRecord, MonitorError> {
        let s = match &message.terminal {
            Some(tag) => self
                .config
                .spec
                .terminal(tag)
                .ok_or_else(|| MonitorError::UnknownTerminal(tag.clone()))?,
            None => abstract_state(&message.variables, &self.config.spec)?,
        };
        let (_, probability) = self.lookup(&s)?;
        let decision = self.step_symbolic(&message.variables, s)?;
        Ok(StreamRecord {
            step: message.step,
            decision: if decision.is_enforce() {
                "enforce"
            } else {
                "continue"
            },
            strategy: self.config.strategy.name(),
            state_id: s.id(),
            probability,
            theta: self.config.theta(),
            payload: enforcement_payload(&decision),
        })
    }

    pub fn step(&mut self, observation: &ConcreteState) -> Result<MonitorDecision, MonitorError> {
        let s = abstract_state(observation, &self.config.spec)?;
        self.step_symbolic(observation, s)
    }

    /// Step for an observation whose abstract state is already known, e.g. a
    /// terminal marker reported by the host.
    pub fn step_symbolic(
        &mut self,
        observation: &ConcreteState,
        s: SymbolicState,
    ) -> Result<MonitorDecision, MonitorError> {
        let step_index = self.steps;
        self.steps += 1;
        if let Some(d) = &self.tripped {
            return Ok(d.clone());
        }
        let (index, probability) = self.lookup(&s)?;
        let space = self.config.model.space();
        let (bound, theta, _) = self.config.parts();
        if violates(probability, bound, theta) {
            let decision = MonitorDecision::Enforce {
                strategy: self.config.strategy.clone(),
                explanation: Explanation {
                    state: s,
                    state_id: s.id(),
                    state_label: space.label(index).to_string(),
                    decoded: decode(&s, &self.config.spec),
                    probability,
                    bound,
                    theta,
                    property_text: self.config.property.to_string(),
                    step_index,
                },
            };
            self.tripped = Some(decision.clone());
            return Ok(decision);
        }
        self.buffer.push((observation.clone(), s));
        Ok(MonitorDecision::Continue)
    }
}

/// Message for the host to act on; `None` for `Continue`.
pub fn enforcement_payload(decision: &MonitorDecision) -> Option<Json> {
    let MonitorDecision::Enforce {
        strategy,
        explanation: e,
    } = decision
    else {
        return None;
    };
    let explanation = serde_json::to_value(e).expect("explanation serializes");
    Some(match strategy {
        Strategy::Stop => json!({ "action": "halt" }),
        Strategy::Reflect => json!({
            "action": "reflect",
            "context": format!(
                "Current abstract state: {}. Estimated probability {:.4} violates the threshold {} {} of `{}`; \
                 this state signals elevated future risk. Reconsider the plan before acting.",
                e.decoded, e.probability, e.bound, e.theta, e.property_text
            ),
            "explanation": explanation,
        }),
        Strategy::UserInspection => {
            let token = hex_digest(
                format!("{}|{}|{}", e.step_index, e.state_id, e.property_text).as_bytes(),
            );
            json!({
                "action": "user_inspection",
                "explanation": explanation,
                "approval_token": &token[..16],
            })
        }
        Strategy::InvokeAction { name, parameters } => json!({
            "action": "invoke",
            "name": name,
            "parameters": parameters,
        }),
    })
}

/// One line of the monitor's input stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    pub step: u64,
    #[serde(default)]
    pub variables: ConcreteState,
    /// Terminal tag reported by the host instead of variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<String>,
}

/// One line of the monitor's output stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamRecord {
    pub step: u64,
    pub decision: &'static str,
    pub strategy: String,
    pub state_id: u64,
    pub probability: f64,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<Json>,
}

/// Runs the line protocol: one [`Observation`] per input line, one
/// [`StreamRecord`] per output line. Blank lines are skipped. Returns whether
/// the monitor is tripped at end of input.
pub fn run_stream(
    monitor: &mut Monitor,
    input: impl BufRead,
    mut output: impl Write,
) -> Result<bool, MonitorError> {
    let io = |e: std::io::Error| MonitorError::Io(e.to_string());
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let message: Observation =
            serde_json::from_str(&line).map_err(|e| MonitorError::BadObservation {
                line: i + 1,
                message: e.to_string(),
            })?;
        let record = monitor.record(&message)?;
        serde_json::to_writer(&mut output, &record).map_err(|e| MonitorError::Io(e.to_string()))?;
        output.write_all(b"\n").map_err(io)?;
        output.flush().map_err(io)?;
    }
    Ok(monitor.is_tripped())
}
