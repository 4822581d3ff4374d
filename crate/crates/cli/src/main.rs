use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xfcm::scenarios::ModelVariant;

mod commands;
mod config;
mod output;

/// Invalid flags or configuration; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "xfcm", version, about = "Extended fuzzy cognitive maps of belief, goal and emotion")]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted, where the command allows it).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a network and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Fit model weights to survey responses by grid search.
    Identify(IdentifyArgs),
    /// Validation MSE of fitted weights, one row per model and concept.
    Evaluate(EvaluateArgs),
    /// Explain an unexpected action by an emotion.
    InferEmotion(InferArgs),
    /// Generate a synthetic survey with known ground-truth weights.
    Synth(SynthArgs),
}

/// Network choice and initial state, shared by `simulate` and
/// `infer-emotion`.
#[derive(Args, Debug)]
pub struct NetworkArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with = "network")]
    scenario: Option<u8>,
    /// Network document (JSON) instead of a built-in scenario.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Use the state-dependent weight families.
    #[arg(long)]
    functional: bool,
    /// Rationally perceived knowledge: a forecast term or a value in [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    rpk: Option<String>,
    /// General world knowledge: a season term or a value.
    #[arg(long, allow_hyphen_values = true)]
    gwk: Option<String>,
    /// General preference: an attitude term or a value.
    #[arg(long, allow_hyphen_values = true)]
    gp: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    belief0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    goal0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    emotion0: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    net: NetworkArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Cyclic,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    /// Survey CSV (term or numeric form).
    #[arg(long)]
    survey: PathBuf,
    /// Scenario catalogue CSV; the bundled 26 scenarios by default.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long, default_value = "M1")]
    model: ModelVariant,
    /// Fit only this batch; all three by default.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    batch: Option<u8>,
    /// Grid spacing over [-1, 1].
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Cyclic)]
    mode: ModeArg,
    #[arg(long, default_value_t = 3)]
    max_sweeps: usize,
    /// Comma-separated subset of the model's parameters to fit.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Fitted-weights JSON from `identify`.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    survey: PathBuf,
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Evaluate only this batch.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    batch: Option<u8>,
    /// Also write per-scenario and per-set MSE rows here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InferArgs {
    /// `step,action` CSV with one observed action.
    #[arg(long)]
    observation: PathBuf,
    /// `step,belief,goal` estimates; defaults to the first two steps of
    /// the belief-goal model.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Action threshold on the goal, in (-1, 1).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[command(flatten)]
    net: NetworkArgs,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Grid spacing the ground-truth weights are drawn from.
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    /// Write raw numeric responses instead of snapping to terms.
    #[arg(long)]
    numeric: bool,
    /// Standard deviation of Gaussian response noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
