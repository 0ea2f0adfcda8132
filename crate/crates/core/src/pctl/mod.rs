//! PCTL formulas: parsing, printing, and model checking over a [`Dtmc`].

mod ast;
mod check;
mod parser;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ast::{pretty, Bound, PathFormula, StateFormula};
pub use check::{
    bounded_until_probability, next_probability, path_probability, reach_probability, sat_states,
    solver_invocations, MAX_ITERATIONS, REACH_TOLERANCE,
};
pub use parser::{parse, KEYWORDS};

use crate::abstraction::StateSpace;
use crate::expr::{Expr, ExprError};

/// Set of canonical state indices.
pub type StateSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PctlError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("threshold {theta} at byte {offset} is outside [0,1]")]
    ThetaOutOfRange { offset: usize, theta: f64 },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("reachability did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
    #[error("label `{atom}`: {message}")]
    BadLabel { atom: String, message: String },
}

/// How one atom is defined in a labeling file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<u64>>,
}

/// JSON labeling file: atom name to definition.
pub type LabelingFile = BTreeMap<String, LabelDef>;

/// Satisfaction sets of atomic propositions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labeling {
    atoms: BTreeMap<String, StateSet>,
}

impl Labeling {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: &str, states: StateSet) {
        self.atoms.insert(atom.to_string(), states);
    }

    pub fn with(mut self, atom: &str, states: impl IntoIterator<Item = usize>) -> Self {
        self.insert(atom, states.into_iter().collect());
        self
    }

    pub fn get(&self, atom: &str) -> Option<&StateSet> {
        self.atoms.get(atom)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&str, &StateSet)> {
        self.atoms.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Resolves a labeling file against a state space. Expression labels are
    /// predicate-bit expressions; terminal tag names may appear as atoms.
    pub fn resolve(file: &LabelingFile, space: &StateSpace) -> Result<Self, PctlError> {
        let mut out = Labeling::new();
        for (atom, def) in file {
            let bad = |message: String| PctlError::BadLabel {
                atom: atom.clone(),
                message,
            };
            let set = match (&def.expr, &def.states) {
                (Some(text), None) => {
                    let expr = Expr::parse(text).map_err(|e| bad(e.to_string()))?;
                    let mut set = StateSet::new();
                    for i in 0..space.len() {
                        if space
                            .eval_label(&expr, i)
                            .map_err(|e: ExprError| bad(e.to_string()))?
                        {
                            set.insert(i);
                        }
                    }
                    set
                }
                (None, Some(ids)) => ids
                    .iter()
                    .map(|&id| {
                        space
                            .index_of_id(id)
                            .ok_or_else(|| bad(format!("state id {id} is not in the model")))
                    })
                    .collect::<Result<_, _>>()?,
                _ => return Err(bad("exactly one of `expr` or `states` is required".into())),
            };
            out.insert(atom, set);
        }
        Ok(out)
    }

    pub fn from_json(text: &str, space: &StateSpace) -> Result<Self, PctlError> {
        let file: LabelingFile = serde_json::from_str(text).map_err(|e| PctlError::BadLabel {
            atom: String::new(),
            message: e.to_string(),
        })?;
        Self::resolve(&file, space)
    }
}
