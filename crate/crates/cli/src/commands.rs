use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, IsTerminal, Write};

use reachguard::domains::domain_by_name;
use reachguard::pctl::{parse, path_probability, sat_states, Labeling, LabelingFile};
use reachguard::trace_sim::{
    read_symbolic_traces, write_symbolic_traces, write_traces, SymbolicTrace,
};
use reachguard::{
    count_transitions, enumerate_state_space, learn_dtmc, pac_requirement, run_stream, sample,
    AbstractionSpec, GroundTruthChain, Model, Monitor, MonitorConfig, StateFormula, StateSpace,
    Strategy, SymbolicState, Trace,
};
use serde_json::json;

use crate::{
    AbstractArgs, CheckArgs, CliError, ExportDotArgs, LearnArgs, MonitorArgs, PacArgs, SimulateArgs,
};

type CliResult = Result<u8, CliError>;

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{path}: {e}")))
}

fn open(path: &str) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::new("io", format!("{path}: {e}")))
}

/// File writer, or stdout when `path` is `None`.
fn sink(path: Option<&str>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::new("io", format!("{p}: {e}")))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_all(path: Option<&str>, text: &str) -> Result<(), CliError> {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::new("io", e))
}

fn emit_json(value: &serde_json::Value) -> Result<(), CliError> {
    write_all(
        None,
        &format!("{}\n", serde_json::to_string_pretty(value).expect("json")),
    )
}

fn load_spec(path: &str) -> Result<AbstractionSpec, CliError> {
    AbstractionSpec::from_json(&read(path)?).map_err(|e| CliError::new("spec", e))
}

fn load_model(path: &str) -> Result<Model, CliError> {
    Model::from_json(&read(path)?).map_err(|e| CliError::new("model", format!("{path}: {e}")))
}

fn load_labels(path: &str, space: &StateSpace) -> Result<Labeling, CliError> {
    Labeling::from_json(&read(path)?, space).map_err(|e| CliError::new("labels", e))
}

fn parse_prop(text: &str) -> Result<StateFormula, CliError> {
    parse(text).map_err(|e| CliError::new("property", e))
}

fn space_of(spec: &AbstractionSpec) -> Result<StateSpace, CliError> {
    enumerate_state_space(spec).map_err(|e| CliError::new("spec", e))
}

fn load_symbolic(path: &str, space: &StateSpace) -> Result<Vec<Vec<SymbolicState>>, CliError> {
    let traces = read_symbolic_traces(open(path)?).map_err(|e| CliError::new("traces", e))?;
    traces
        .iter()
        .map(|t| {
            t.states
                .iter()
                .map(|&id| {
                    space
                        .index_of_id(id)
                        .map(|i| space.state(i))
                        .ok_or_else(|| {
                            CliError::new(
                                "traces",
                                format!(
                                    "trace `{}`: state id {id} is not in the spec's state space",
                                    t.id
                                ),
                            )
                        })
                })
                .collect()
        })
        .collect()
}

fn is_tty() -> bool {
    io::stdout().is_terminal()
}

pub fn abstract_traces(a: AbstractArgs) -> CliResult {
    let spec = load_spec(&a.spec)?;
    let traces = reachguard::trace_sim::read_traces(open(&a.traces)?)
        .map_err(|e| CliError::new("traces", e))?;
    let symbolic = traces
        .iter()
        .map(|t| {
            Ok(SymbolicTrace {
                id: t.id.clone(),
                states: t
                    .to_symbolic(&spec, a.collapse)
                    .map_err(|e| CliError::new("abstraction", format!("trace `{}`: {e}", t.id)))?
                    .iter()
                    .map(SymbolicState::id)
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut w = sink(a.out.as_deref())?;
    write_symbolic_traces(&symbolic, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::new("io", e))?;
    Ok(0)
}

pub fn learn(a: LearnArgs) -> CliResult {
    let spec = load_spec(&a.spec)?;
    let space = space_of(&spec)?;
    let traces = load_symbolic(&a.abs, &space)?;
    let counts =
        count_transitions(&traces, &space, &spec).map_err(|e| CliError::new("learn", e))?;
    let model = learn_dtmc(&counts, &space, &spec, a.alpha)
        .map_err(|e| CliError::new("learn", e))?
        .with_spec_hash(spec.hash());
    write_all(a.out.as_deref(), &format!("{}\n", model.to_json()))?;
    if a.out.is_some() && is_tty() {
        println!(
            "learned {} states from {} traces ({} transitions skipped as invalid)",
            model.len(),
            traces.len(),
            counts.skipped_invalid()
        );
        for &s in model.sinks() {
            println!("  unvisited state {} became a sink", space.describe(s));
        }
    }
    Ok(0)
}

pub fn pac(a: PacArgs) -> CliResult {
    let spec = load_spec(&a.spec)?;
    let space = space_of(&spec)?;
    let traces = load_symbolic(&a.abs, &space)?;
    let counts = count_transitions(&traces, &space, &spec).map_err(|e| CliError::new("pac", e))?;
    let report = pac_requirement(&counts, &space, a.epsilon, a.delta)
        .map_err(|e| CliError::new("pac", e))?;
    if is_tty() {
        println!(
            "epsilon={} delta={} m={} delta'={}",
            report.epsilon, report.delta, report.m, report.delta_prime
        );
        println!(
            "{:>8}  {:<12} {:>10} {:>10} {:>12}  ok",
            "id", "label", "n_p", "max_ratio", "required"
        );
        for s in &report.per_state {
            println!(
                "{:>8}  {:<12} {:>10} {:>10.4} {:>12.2}  {}",
                s.state_id,
                s.label,
                s.n_p,
                s.max_ratio,
                s.required,
                if s.sufficient { "yes" } else { "no" }
            );
        }
    } else {
        emit_json(&serde_json::to_value(&report).expect("report serializes"))?;
    }
    Ok(if report.all_sufficient { 0 } else { 1 })
}

pub fn check(a: CheckArgs) -> CliResult {
    let model = load_model(&a.model)?;
    if let Some(path) = &a.spec {
        let spec = load_spec(path)?;
        if model.spec_hash().is_some_and(|h| h != spec.hash()) {
            return Err(CliError::new(
                "spec_mismatch",
                "model was learned under a different abstraction spec",
            ));
        }
    }
    let space = model.space();
    let labeling = load_labels(&a.labels, space)?;
    let formula = parse_prop(&a.prop)?;
    let sat = sat_states(&model, &labeling, &formula).map_err(|e| CliError::new("check", e))?;
    let probabilities = match &formula {
        StateFormula::Prob { path, .. } => {
            Some(path_probability(&model, &labeling, path).map_err(|e| CliError::new("check", e))?)
        }
        _ => None,
    };
    let property = formula.to_string();

    let entry = |i: usize| {
        let mut v = json!({ "id": space.state(i).id(), "label": space.label(i) });
        if let Some(p) = &probabilities {
            v["probability"] = json!(p[i]);
        }
        v["satisfied"] = json!(sat.contains(&i));
        v
    };

    if let Some(name) = &a.state {
        let i = space
            .resolve(name)
            .ok_or_else(|| CliError::new("unknown_state", format!("no state `{name}` in model")))?;
        if is_tty() {
            let p = probabilities
                .as_ref()
                .map_or(String::new(), |p| format!(" probability {}", p[i]));
            println!(
                "{} ({}):{} {}",
                space.label(i),
                space.describe(i),
                p,
                if sat.contains(&i) {
                    "satisfied"
                } else {
                    "violated"
                }
            );
        } else {
            let mut v = entry(i);
            v["property"] = json!(property);
            emit_json(&v)?;
        }
        return Ok(0);
    }

    if is_tty() {
        println!("{property}");
        for i in 0..space.len() {
            let p = probabilities
                .as_ref()
                .map_or(String::new(), |p| format!("{:>12.6}", p[i]));
            println!(
                "{:>8}  {:<12} {}  {}",
                space.state(i).id(),
                space.label(i),
                p,
                if sat.contains(&i) { "sat" } else { "-" }
            );
        }
    } else {
        emit_json(&json!({
            "property": property,
            "satisfying": sat.iter().map(|&i| space.state(i).id()).collect::<Vec<_>>(),
            "states": (0..space.len()).map(entry).collect::<Vec<_>>(),
        }))?;
    }
    Ok(0)
}

pub fn monitor(a: MonitorArgs) -> CliResult {
    let spec = load_spec(&a.spec)?;
    let model = load_model(&a.model)?;
    let labeling = load_labels(&a.labels, model.space())?;
    let strategy: Strategy = a
        .strategy
        .parse()
        .map_err(|e: String| CliError::new("usage", e))?;
    let config = MonitorConfig::new(parse_prop(&a.prop)?, labeling, strategy, spec, model)
        .map_err(|e| CliError::new("monitor", e))?;
    let mut monitor = Monitor::new(config).map_err(|e| CliError::new("monitor", e))?;
    let input: Box<dyn BufRead> = match &a.input {
        Some(p) => Box::new(open(p)?),
        None => Box::new(io::stdin().lock()),
    };
    let tripped = run_stream(&mut monitor, input, io::stdout().lock())
        .map_err(|e| CliError::new("monitor", e))?;
    Ok(if tripped { 3 } else { 0 })
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let (chain, spec, labels): (
        GroundTruthChain,
        Option<AbstractionSpec>,
        Option<LabelingFile>,
    ) = match a.domain.strip_prefix("file:") {
        Some(path) => {
            let model = load_model(path)?;
            let initial = match &a.initial {
                Some(name) => model.space().resolve(name).ok_or_else(|| {
                    CliError::new("unknown_state", format!("no state `{name}` in model"))
                })?,
                None => 0,
            };
            (
                GroundTruthChain::from_model("model", model, initial),
                None,
                None,
            )
        }
        None => {
            let d = domain_by_name(&a.domain).ok_or_else(|| {
                CliError::new(
                    "usage",
                    format!(
                        "unknown domain `{}`; expected one of {} or file:<model.json>",
                        a.domain,
                        reachguard::domains::DOMAINS.join(", ")
                    ),
                )
            })?;
            if a.initial.is_some() {
                return Err(CliError::new(
                    "usage",
                    "--initial applies to file: domains only",
                ));
            }
            (d.chain, Some(d.spec), Some(d.labels))
        }
    };
    if a.max_len == 0 {
        return Err(CliError::new("usage", "--max-len must be at least 1"));
    }
    if (a.spec_out.is_some() && spec.is_none()) || (a.labels_out.is_some() && labels.is_none()) {
        return Err(CliError::new(
            "usage",
            "--spec-out and --labels-out need a bundled domain",
        ));
    }
    if let (Some(path), Some(spec)) = (&a.spec_out, &spec) {
        write_all(Some(path), &format!("{}\n", spec.to_json()))?;
    }
    if let (Some(path), Some(labels)) = (&a.labels_out, &labels) {
        let text = serde_json::to_string_pretty(labels).expect("labels serialize");
        write_all(Some(path), &format!("{text}\n"))?;
    }
    if let Some(path) = &a.model_out {
        write_all(Some(path), &format!("{}\n", chain.generator.to_json()))?;
    }
    let traces: Vec<Trace> = sample(&chain, a.n, a.max_len, a.seed);
    let mut w = sink(a.out.as_deref())?;
    write_traces(&traces, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::new("io", e))?;
    Ok(0)
}

pub fn export_dot(a: ExportDotArgs) -> CliResult {
    let model = load_model(&a.model)?;
    write_all(a.out.as_deref(), &model.to_dot())?;
    Ok(0)
}
