mod commands;

use std::fmt;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (file format 1)");

#[derive(Parser)]
#[command(name = "reachguard", version = VERSION, about = "Learn, check and enforce reachability properties of agent executions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map concrete traces to symbolic state ids.
    Abstract(AbstractArgs),
    /// Learn a DTMC from abstracted traces.
    Learn(LearnArgs),
    /// Check per-state sample sufficiency; exits 1 if any state falls short.
    Pac(PacArgs),
    /// Evaluate a PCTL formula on a model.
    Check(CheckArgs),
    /// Monitor a stream of observations read as JSON lines.
    Monitor(MonitorArgs),
    /// Sample traces from a bundled domain or a model file.
    Simulate(SimulateArgs),
    /// Render a model as GraphViz DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
pub struct AbstractArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub traces: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
    /// Merge runs of identical consecutive states.
    #[arg(long)]
    pub collapse: bool,
}

#[derive(Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub abs: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args)]
pub struct PacArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub abs: String,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub labels: String,
    #[arg(long)]
    pub prop: String,
    /// Report the verdict for one state, given by id or label.
    #[arg(long)]
    pub state: Option<String>,
    /// Refuse models learned under a different abstraction spec.
    #[arg(long)]
    pub spec: Option<String>,
}

#[derive(Args)]
pub struct MonitorArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub labels: String,
    #[arg(long)]
    pub prop: String,
    /// stop, reflect, inspect or invoke:<action>
    #[arg(long, default_value = "stop")]
    pub strategy: String,
    /// Observation stream; stdin when omitted.
    #[arg(long)]
    pub input: Option<String>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// microwave, yellow_light, stove or file:<model.json>
    #[arg(long)]
    pub domain: String,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = reachguard::trace_sim::DEFAULT_MAX_LEN)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<String>,
    /// Start state for file: domains, by id or label. Defaults to the first state.
    #[arg(long)]
    pub initial: Option<String>,
    /// Also write the bundled domain's abstraction spec.
    #[arg(long)]
    pub spec_out: Option<String>,
    /// Also write the bundled domain's labeling file.
    #[arg(long)]
    pub labels_out: Option<String>,
    /// Also write the generator chain as a model file.
    #[arg(long)]
    pub model_out: Option<String>,
}

#[derive(Args)]
pub struct ExportDotArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long)]
    pub out: Option<String>,
}

/// Failure reported on stderr as `{"code", "message"}`.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl fmt::Display) -> Self {
        CliError {
            code,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&CliError::new("usage", e.render().to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Abstract(a) => commands::abstract_traces(a),
        Command::Learn(a) => commands::learn(a),
        Command::Pac(a) => commands::pac(a),
        Command::Check(a) => commands::check(a),
        Command::Monitor(a) => commands::monitor(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::ExportDot(a) => commands::export_dot(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}

fn report(e: &CliError) {
    eprintln!(
        "{}",
        serde_json::json!({ "code": e.code, "message": e.message })
    );
}
