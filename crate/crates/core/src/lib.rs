//! Probabilistic runtime guard for agent executions.
//!
//! Concrete observations are mapped to boolean predicate vectors
//! ([`abstraction`]), a discrete-time Markov chain is learned from abstract
//! traces ([`dtmc`]), PCTL properties are checked against it ([`pctl`]), and
//! a [`monitor`] uses the precomputed probabilities to intervene at runtime.
//! [`trace_sim`] samples synthetic traces from generator chains.

pub mod abstraction;
pub mod domains;
pub mod dtmc;
pub mod expr;
pub mod monitor;
pub mod pctl;
pub mod scalar;
pub mod trace_sim;

pub use abstraction::{
    abstract_state, abstract_trace, enumerate_state_space, AbstractionError, AbstractionSpec,
    ConcreteState, SpecFile, StateSpace, SymbolicState,
};
pub use dtmc::{
    count_transitions, learn_dtmc, pac_requirement, required_samples, CountMatrix, Dtmc, DtmcError,
    PacReport,
};
pub use expr::{Expr, Value, VarKind};
pub use monitor::{
    build_cache, enforcement_payload, run_stream, Monitor, MonitorConfig, MonitorDecision,
    MonitorError, Observation, ReachabilityCache, Strategy, StreamRecord,
};
pub use pctl::{parse, Bound, Labeling, PathFormula, PctlError, StateFormula};
pub use scalar::Scalar;
pub use trace_sim::{sample, GroundTruthChain, Trace, TraceError, TraceStep};

/// Version of the spec, model and trace file formats.
pub const FORMAT_VERSION: u32 = 1;

/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;
/// Chain with `f64` probabilities, the type used by the checker and monitor.
pub type Model = Dtmc<f64>;
/// Single-precision chain.
pub type ModelF32 = Dtmc<f32>;
/// Chain with exact rational probabilities.
pub type ExactModel = Dtmc<Rational>;
