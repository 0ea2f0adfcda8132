//! Concrete trace files and a seeded ground-truth simulator.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{
    abstract_state, AbstractionError, AbstractionSpec, ConcreteState, SymbolicState,
};
use crate::dtmc::Dtmc;
use crate::expr::{atom_key, Value};

pub const DEFAULT_MAX_LEN: usize = 200;
pub const TRUNCATED: &str = "truncated";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("trace `{trace}`: {source}")]
    Abstraction {
        trace: String,
        source: AbstractionError,
    },
    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    #[serde(default)]
    pub instruction: String,
    #[serde(default)]
    pub env: String,
    #[serde(default)]
    pub seed: u64,
}

/// One step of a trace. A step with `terminal` set marks the end of the
/// task; its `state` is usually empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub action: String,
    #[serde(default)]
    pub state: ConcreteState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<String>,
}

impl TraceStep {
    pub fn new(action: &str, state: ConcreteState) -> Self {
        TraceStep {
            action: action.to_string(),
            state,
            terminal: None,
        }
    }

    pub fn terminal(action: &str, tag: &str) -> Self {
        TraceStep {
            action: action.to_string(),
            state: ConcreteState::new(),
            terminal: Some(tag.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub id: String,
    #[serde(default)]
    pub meta: TraceMeta,
    pub steps: Vec<TraceStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
}

impl Trace {
    /// Abstract trace: terminal steps map to their terminal state, all other
    /// steps through the predicates.
    pub fn to_symbolic(
        &self,
        spec: &AbstractionSpec,
        collapse: bool,
    ) -> Result<Vec<SymbolicState>, TraceError> {
        let mut out: Vec<SymbolicState> = Vec::with_capacity(self.steps.len());
        for (index, step) in self.steps.iter().enumerate() {
            let s = match &step.terminal {
                Some(tag) => spec
                    .terminal(tag)
                    .ok_or_else(|| TraceError::UnknownTerminal(tag.clone()))?,
                None => abstract_state(&step.state, spec).map_err(|e| TraceError::Abstraction {
                    trace: self.id.clone(),
                    source: AbstractionError::AtStep {
                        index,
                        source: Box::new(e),
                    },
                })?,
            };
            if collapse && out.last() == Some(&s) {
                continue;
            }
            out.push(s);
        }
        Ok(out)
    }
}

/// Abstracted trace as written by the `abstract` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicTrace {
    pub id: String,
    pub states: Vec<u64>,
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(reader: impl BufRead) -> Result<Vec<T>, TraceError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| TraceError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        let item = serde_json::from_value(value).map_err(|e| TraceError::SchemaViolation {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn read_traces(reader: impl BufRead) -> Result<Vec<Trace>, TraceError> {
    let traces: Vec<Trace> = parse_jsonl(reader)?;
    for (i, t) in traces.iter().enumerate() {
        if t.steps.is_empty() {
            return Err(TraceError::SchemaViolation {
                line: i + 1,
                message: format!("trace `{}` has no steps", t.id),
            });
        }
    }
    Ok(traces)
}

pub fn write_traces(traces: &[Trace], mut writer: impl Write) -> io::Result<()> {
    for t in traces {
        serde_json::to_writer(&mut writer, t)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_traces(path: impl AsRef<Path>) -> Result<Vec<Trace>, TraceError> {
    read_traces(BufReader::new(fs::File::open(path)?))
}

pub fn save_traces(traces: &[Trace], path: impl AsRef<Path>) -> Result<(), TraceError> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    write_traces(traces, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_symbolic_traces(reader: impl BufRead) -> Result<Vec<SymbolicTrace>, TraceError> {
    parse_jsonl(reader)
}

pub fn write_symbolic_traces(traces: &[SymbolicTrace], mut writer: impl Write) -> io::Result<()> {
    for t in traces {
        serde_json::to_writer(&mut writer, t)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// A generator chain with an emission of a concrete observation per state.
#[derive(Debug, Clone)]
pub struct GroundTruthChain {
    pub name: String,
    pub generator: Dtmc<f64>,
    pub initial: usize,
    /// Observation template for each non-terminal state; `None` for terminals.
    pub emissions: Vec<Option<ConcreteState>>,
    /// Action names for transitions; unnamed transitions are reported as `step`.
    pub actions: BTreeMap<(usize, usize), String>,
}

impl GroundTruthChain {
    /// Chain over a model file's states, emitting one boolean variable per
    /// predicate, named by the predicate's canonical key.
    pub fn from_model(name: &str, generator: Dtmc<f64>, initial: usize) -> Self {
        let space = generator.space().clone();
        let keys: Vec<String> = space
            .predicate_names()
            .iter()
            .map(|n| atom_key(n).unwrap_or_else(|| n.clone()))
            .collect();
        let emissions = space
            .states()
            .iter()
            .map(|s| {
                (!s.is_terminal()).then(|| ConcreteState {
                    variables: keys
                        .iter()
                        .enumerate()
                        .map(|(i, k)| (k.clone(), Value::Bool(s.bit(i))))
                        .collect(),
                })
            })
            .collect();
        GroundTruthChain {
            name: name.to_string(),
            generator,
            initial,
            emissions,
            actions: BTreeMap::new(),
        }
    }

    /// Checks that every emission abstracts back to the state it was emitted
    /// from under `spec`.
    pub fn check_emissions(&self, spec: &AbstractionSpec) -> Result<(), String> {
        let space = self.generator.space();
        for (i, emission) in self.emissions.iter().enumerate() {
            let s = space.state(i);
            match (emission, s.is_terminal()) {
                (None, true) => {}
                (Some(obs), false) => {
                    let got = abstract_state(obs, spec).map_err(|e| e.to_string())?;
                    if got != s {
                        return Err(format!(
                            "emission of {} abstracts to {}",
                            space.label(i),
                            got
                        ));
                    }
                }
                _ => return Err(format!("emission/terminal mismatch at {}", space.label(i))),
            }
        }
        Ok(())
    }

    fn step_for(&self, from: Option<usize>, to: usize) -> TraceStep {
        let action = match from {
            None => "start".to_string(),
            Some(f) => self
                .actions
                .get(&(f, to))
                .cloned()
                .unwrap_or_else(|| "step".to_string()),
        };
        let space = self.generator.space();
        match &self.emissions[to] {
            Some(obs) => TraceStep {
                action,
                state: obs.clone(),
                terminal: None,
            },
            None => TraceStep {
                action,
                state: ConcreteState::new(),
                terminal: space
                    .state(to)
                    .terminal_tag()
                    .map(|t| space.terminals()[t].clone()),
            },
        }
    }
}

/// Draws `n_traces` independent traces. Trace `i` uses its own RNG seeded
/// with `seed + i`, so output does not depend on scheduling.
pub fn sample(chain: &GroundTruthChain, n_traces: usize, max_len: usize, seed: u64) -> Vec<Trace> {
    let space = chain.generator.space();
    let rows: Vec<(Vec<usize>, WeightedIndex<f64>)> = (0..chain.generator.len())
        .map(|p| {
            let row = chain.generator.row(p);
            let cols = row.iter().map(|(q, _)| *q).collect();
            let dist = WeightedIndex::new(row.iter().map(|(_, v)| *v))
                .expect("generator rows are stochastic");
            (cols, dist)
        })
        .collect();

    (0..n_traces)
        .into_par_iter()
        .map(|i| {
            let trace_seed = seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(trace_seed);
            let mut current = chain.initial;
            let mut steps = vec![chain.step_for(None, current)];
            let mut outcome = None;
            loop {
                if let Some(tag) = space.state(current).terminal_tag() {
                    outcome = Some(space.terminals()[tag].clone());
                    break;
                }
                if steps.len() >= max_len {
                    outcome.get_or_insert_with(|| TRUNCATED.to_string());
                    break;
                }
                let (cols, dist) = &rows[current];
                let next = cols[dist.sample(&mut rng)];
                steps.push(chain.step_for(Some(current), next));
                current = next;
            }
            Trace {
                id: format!("{}-{}", chain.name, i),
                meta: TraceMeta {
                    instruction: format!("simulate {}", chain.name),
                    env: chain.name.clone(),
                    seed: trace_seed,
                },
                steps,
                outcome,
            }
        })
        .collect()
}
