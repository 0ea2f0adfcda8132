//! Transition counting, validity-aware Laplace-smoothed DTMC learning, and
//! per-state PAC sample-sufficiency checks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{
    hex_digest, is_valid_transition, AbstractionError, AbstractionSpec, StateSpace, SymbolicState,
};
use crate::scalar::Scalar;

/// Tolerance on row sums of a stochastic matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DtmcError {
    #[error("state {0} is not in the model's state space")]
    UnknownState(String),
    #[error("smoothing constant must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("epsilon and delta must lie in (0,1), got epsilon={epsilon}, delta={delta}")]
    InvalidEpsilonDelta { epsilon: f64, delta: f64 },
    #[error("models have different state spaces")]
    ShapeMismatch,
    #[error("row {row} is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
}

/// Observed transition counts over the canonical state order, stored
/// sparsely by row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountMatrix {
    rows: Vec<BTreeMap<usize, u64>>,
    skipped_invalid: u64,
}

impl CountMatrix {
    pub fn new(n: usize) -> Self {
        CountMatrix {
            rows: vec![BTreeMap::new(); n],
            skipped_invalid: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, p: usize, q: usize) -> u64 {
        self.rows[p].get(&q).copied().unwrap_or(0)
    }

    pub fn add(&mut self, p: usize, q: usize, n: u64) {
        if n > 0 {
            *self.rows[p].entry(q).or_insert(0) += n;
        }
    }

    pub fn row(&self, p: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows[p].iter().map(|(&q, &n)| (q, n))
    }

    pub fn row_total(&self, p: usize) -> u64 {
        self.rows[p].values().sum()
    }

    /// Observed transitions dropped because the domain rules forbid them.
    pub fn skipped_invalid(&self) -> u64 {
        self.skipped_invalid
    }

    /// Adds `other` cell by cell. Counts form a commutative monoid under this
    /// operation, so partial tallies may be merged in any order.
    pub fn merge(mut self, other: CountMatrix) -> CountMatrix {
        for (p, row) in other.rows.into_iter().enumerate() {
            for (q, n) in row {
                self.add(p, q, n);
            }
        }
        self.skipped_invalid += other.skipped_invalid;
        self
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        let n = self.len();
        (0..n)
            .map(|p| (0..n).map(|q| self.get(p, q)).collect())
            .collect()
    }

    pub fn from_dense(dense: &[Vec<u64>]) -> Result<Self, DtmcError> {
        let n = dense.len();
        let mut m = CountMatrix::new(n);
        for (p, row) in dense.iter().enumerate() {
            if row.len() != n {
                return Err(DtmcError::Malformed(format!(
                    "count row {p} has wrong length"
                )));
            }
            for (q, &c) in row.iter().enumerate() {
                m.add(p, q, c);
            }
        }
        Ok(m)
    }
}

/// Tallies adjacent pairs of every trace. Pairs the domain rules forbid are
/// skipped and counted in [`CountMatrix::skipped_invalid`].
pub fn count_transitions(
    traces: &[Vec<SymbolicState>],
    space: &StateSpace,
    spec: &AbstractionSpec,
) -> Result<CountMatrix, DtmcError> {
    let n = space.len();
    traces
        .par_iter()
        .try_fold(
            || CountMatrix::new(n),
            |mut acc, trace| {
                let idx = trace
                    .iter()
                    .map(|s| {
                        space
                            .index_of(s)
                            .ok_or_else(|| DtmcError::UnknownState(format!("id {}", s.id())))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                for (w, pair) in idx.windows(2).zip(trace.windows(2)) {
                    if is_valid_transition(&pair[0], &pair[1], spec) {
                        acc.add(w[0], w[1], 1);
                    } else {
                        acc.skipped_invalid += 1;
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(|| CountMatrix::new(n), |a, b| Ok(a.merge(b)))
}

/// A discrete-time Markov chain with sparse rows over a canonical state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dtmc<T = f64> {
    space: StateSpace,
    rows: Vec<Vec<(usize, T)>>,
    counts: Option<CountMatrix>,
    alpha: Option<T>,
    sinks: Vec<usize>,
    spec_hash: Option<String>,
}

impl<T: Scalar> Dtmc<T> {
    /// Builds a chain from sparse rows, checking that each row is
    /// stochastic within [`ROW_SUM_TOLERANCE`].
    pub fn from_rows(space: StateSpace, rows: Vec<Vec<(usize, T)>>) -> Result<Self, DtmcError> {
        let n = space.len();
        if rows.len() != n {
            return Err(DtmcError::Malformed(format!(
                "{} rows for {} states",
                rows.len(),
                n
            )));
        }
        let mut clean = Vec::with_capacity(n);
        for (p, row) in rows.into_iter().enumerate() {
            let mut row: Vec<(usize, T)> = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            row.sort_by_key(|(q, _)| *q);
            let mut sum = T::zero();
            for (i, (q, v)) in row.iter().enumerate() {
                if *q >= n || (i > 0 && row[i - 1].0 == *q) {
                    return Err(DtmcError::NotStochastic {
                        row: p,
                        reason: format!("bad or repeated column {q}"),
                    });
                }
                if *v < T::zero() || *v > T::one() {
                    return Err(DtmcError::NotStochastic {
                        row: p,
                        reason: format!("entry {v:?} outside [0,1]"),
                    });
                }
                sum = sum + v.clone();
            }
            if (sum.approx() - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(DtmcError::NotStochastic {
                    row: p,
                    reason: format!("sums to {}", sum.approx()),
                });
            }
            clean.push(row);
        }
        Ok(Dtmc {
            space,
            rows: clean,
            counts: None,
            alpha: None,
            sinks: Vec::new(),
            spec_hash: None,
        })
    }

    pub fn from_dense(space: StateSpace, dense: Vec<Vec<T>>) -> Result<Self, DtmcError> {
        let n = space.len();
        if dense.iter().any(|r| r.len() != n) {
            return Err(DtmcError::Malformed("dense row of wrong length".into()));
        }
        let rows = dense
            .into_iter()
            .map(|r| r.into_iter().enumerate().collect())
            .collect();
        Self::from_rows(space, rows)
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, p: usize) -> &[(usize, T)] {
        &self.rows[p]
    }

    pub fn prob(&self, p: usize, q: usize) -> T {
        self.rows[p]
            .binary_search_by_key(&q, |(c, _)| *c)
            .map(|i| self.rows[p][i].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        (0..n)
            .map(|p| (0..n).map(|q| self.prob(p, q)).collect())
            .collect()
    }

    pub fn counts(&self) -> Option<&CountMatrix> {
        self.counts.as_ref()
    }

    pub fn alpha(&self) -> Option<&T> {
        self.alpha.as_ref()
    }

    /// Non-terminal rows that had no mass and were repaired to self-loops.
    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }

    pub fn spec_hash(&self) -> Option<&str> {
        self.spec_hash.as_deref()
    }

    pub fn with_spec_hash(mut self, hash: impl Into<String>) -> Self {
        self.spec_hash = Some(hash.into());
        self
    }

    /// Predecessor lists over edges with positive probability.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pre = vec![Vec::new(); self.len()];
        for (p, row) in self.rows.iter().enumerate() {
            for (q, v) in row {
                if !v.is_zero() {
                    pre[*q].push(p);
                }
            }
        }
        pre
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Dtmc<U> {
        Dtmc {
            space: self.space.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|(q, v)| (*q, f(v))).collect())
                .collect(),
            counts: self.counts.clone(),
            alpha: self.alpha.as_ref().map(&f),
            sinks: self.sinks.clone(),
            spec_hash: self.spec_hash.clone(),
        }
    }
}

/// Normalizes smoothed counts into a transition matrix.
///
/// Each valid transition receives `count + alpha`, invalid ones receive
/// nothing, and each row is divided by its total. Non-terminal rows with zero
/// total become self-loops and are reported through [`Dtmc::sinks`];
/// terminal rows are always self-loops.
pub fn learn_dtmc<T: Scalar>(
    counts: &CountMatrix,
    space: &StateSpace,
    spec: &AbstractionSpec,
    alpha: T,
) -> Result<Dtmc<T>, DtmcError> {
    if alpha < T::zero() {
        return Err(DtmcError::NegativeAlpha(alpha.approx()));
    }
    let n = space.len();
    if counts.len() != n {
        return Err(DtmcError::ShapeMismatch);
    }
    let mut rows = Vec::with_capacity(n);
    let mut sinks = Vec::new();
    for p in 0..n {
        let from = space.state(p);
        if from.is_terminal() {
            rows.push(vec![(p, T::one())]);
            continue;
        }
        let mut smoothed: Vec<(usize, T)> = Vec::new();
        let mut total = T::zero();
        for q in 0..n {
            if !is_valid_transition(&from, &space.state(q), spec) {
                continue;
            }
            let c = T::from_count(counts.get(p, q)) + alpha.clone();
            if !c.is_zero() {
                total = total + c.clone();
                smoothed.push((q, c));
            }
        }
        if total.is_zero() {
            sinks.push(p);
            rows.push(vec![(p, T::one())]);
        } else {
            rows.push(
                smoothed
                    .into_iter()
                    .map(|(q, c)| (q, c / total.clone()))
                    .collect(),
            );
        }
    }
    Ok(Dtmc {
        space: space.clone(),
        rows,
        counts: Some(counts.clone()),
        alpha: Some(alpha),
        sinks,
        spec_hash: Some(spec.hash()),
    })
}

/// L∞ distance between two transition matrices on the same state space.
pub fn model_distance<T: Scalar>(a: &Dtmc<T>, b: &Dtmc<T>) -> Result<f64, DtmcError> {
    if !a.space.same_states(&b.space) {
        return Err(DtmcError::ShapeMismatch);
    }
    let mut worst = 0.0f64;
    for p in 0..a.len() {
        let (ra, rb) = (a.row(p), b.row(p));
        let (mut i, mut j) = (0, 0);
        while i < ra.len() || j < rb.len() {
            let qa = ra.get(i).map_or(usize::MAX, |e| e.0);
            let qb = rb.get(j).map_or(usize::MAX, |e| e.0);
            let diff = if qa == qb {
                let d = (ra[i].1.approx() - rb[j].1.approx()).abs();
                i += 1;
                j += 1;
                d
            } else if qa < qb {
                i += 1;
                ra[i - 1].1.approx().abs()
            } else {
                j += 1;
                rb[j - 1].1.approx().abs()
            };
            worst = worst.max(diff);
        }
    }
    Ok(worst)
}

/// Per-state sample sufficiency entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSufficiency {
    pub state_id: u64,
    pub label: String,
    pub n_p: u64,
    pub max_ratio: f64,
    pub required: f64,
    pub sufficient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacReport {
    pub epsilon: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub m: usize,
    pub per_state: Vec<StateSufficiency>,
    pub all_sufficient: bool,
}

/// Minimum transitions out of a state for an (ε, δ) guarantee over a state
/// space of `m` states:
///
/// `(2/ε²) · ln(2m/δ) · [1/4 − (|1/2 − max_ratio| − 2ε/3)²]`
///
/// where `max_ratio` is the largest empirical successor frequency.
pub fn required_samples(
    m: usize,
    epsilon: f64,
    delta: f64,
    max_ratio: f64,
) -> Result<f64, DtmcError> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) || m == 0 {
        return Err(DtmcError::InvalidEpsilonDelta { epsilon, delta });
    }
    let delta_prime = delta / m as f64;
    let spread = (0.5 - max_ratio).abs() - 2.0 * epsilon / 3.0;
    let bracket = (0.25 - spread * spread).max(0.0);
    Ok(2.0 / (epsilon * epsilon) * (2.0 / delta_prime).ln() * bracket)
}

/// Checks every non-terminal state against [`required_samples`]. Terminal
/// rows are fixed self-loops and need no samples; they still count toward
/// `m`. Unvisited states are reported insufficient with `max_ratio = 0`.
pub fn pac_requirement(
    counts: &CountMatrix,
    space: &StateSpace,
    epsilon: f64,
    delta: f64,
) -> Result<PacReport, DtmcError> {
    let m = space.len();
    if counts.len() != m {
        return Err(DtmcError::ShapeMismatch);
    }
    let mut per_state = Vec::new();
    for p in 0..m {
        if space.state(p).is_terminal() {
            continue;
        }
        let n_p = counts.row_total(p);
        let max_ratio = if n_p == 0 {
            0.0
        } else {
            counts.row(p).map(|(_, c)| c).max().unwrap_or(0) as f64 / n_p as f64
        };
        let required = required_samples(m, epsilon, delta, max_ratio)?;
        per_state.push(StateSufficiency {
            state_id: space.state(p).id(),
            label: space.label(p).to_string(),
            n_p,
            max_ratio,
            required,
            sufficient: n_p > 0 && n_p as f64 >= required,
        });
    }
    // validates epsilon/delta even when every state is terminal
    required_samples(m.max(1), epsilon, delta, 0.0)?;
    let all_sufficient = per_state.iter().all(|s| s.sufficient);
    Ok(PacReport {
        epsilon,
        delta,
        delta_prime: delta / m.max(1) as f64,
        m,
        per_state,
        all_sufficient,
    })
}

/// JSON model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default)]
    pub spec_hash: Option<String>,
    #[serde(default)]
    pub predicates: Vec<String>,
    #[serde(default)]
    pub terminals: Vec<String>,
    pub states: Vec<StateEntry>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    pub sinks: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub id: u64,
    pub label: String,
}

impl Dtmc<f64> {
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            spec_hash: self.spec_hash.clone(),
            predicates: self.space.predicate_names().to_vec(),
            terminals: self.space.terminals().to_vec(),
            states: self
                .space
                .states()
                .iter()
                .zip(self.space.labels())
                .map(|(s, l)| StateEntry {
                    id: s.id(),
                    label: l.clone(),
                })
                .collect(),
            alpha: self.alpha,
            p: self.to_dense(),
            counts: self.counts.as_ref().map(CountMatrix::to_dense),
            sinks: self
                .sinks
                .iter()
                .map(|&i| self.space.state(i).id())
                .collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self, DtmcError> {
        let width = file.predicates.len();
        let states = file
            .states
            .iter()
            .map(|e| {
                SymbolicState::from_id(e.id, width, file.terminals.len())
                    .ok_or_else(|| DtmcError::Malformed(format!("state id {} out of range", e.id)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labels = file.states.iter().map(|e| e.label.clone()).collect();
        let space = StateSpace::from_parts(file.predicates, file.terminals, states, labels)?;
        let mut dtmc = Dtmc::from_dense(space, file.p)?;
        if let Some(c) = file.counts {
            let counts = CountMatrix::from_dense(&c)?;
            if counts.len() != dtmc.len() {
                return Err(DtmcError::Malformed("count matrix shape".into()));
            }
            dtmc.counts = Some(counts);
        }
        dtmc.sinks = file
            .sinks
            .iter()
            .map(|&id| {
                dtmc.space
                    .index_of_id(id)
                    .ok_or_else(|| DtmcError::Malformed(format!("sink id {id} not a state")))
            })
            .collect::<Result<_, _>>()?;
        dtmc.alpha = file.alpha;
        dtmc.spec_hash = file.spec_hash;
        Ok(dtmc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DtmcError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| DtmcError::Malformed(e.to_string()))?;
        Self::from_file(file)
    }

    /// SHA-256 of the compact model JSON.
    pub fn content_hash(&self) -> String {
        let compact = serde_json::to_string(&self.to_file()).expect("model serializes");
        hex_digest(compact.as_bytes())
    }

    /// GraphViz rendering: one node per state labeled with its decoded
    /// predicate values, one edge per positive transition.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dtmc {\n  rankdir=LR;\n");
        for i in 0..self.len() {
            let shape = if self.space.state(i).is_terminal() {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\\n{}\", shape={}];",
                i,
                escape(self.space.label(i)),
                escape(&self.space.describe(i)),
                shape
            );
        }
        for (p, row) in self.rows.iter().enumerate() {
            for (q, v) in row {
                if *v > 0.0 {
                    let _ = writeln!(out, "  n{p} -> n{q} [label=\"{v:.4}\"];");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
