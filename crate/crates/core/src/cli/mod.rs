//! `tumornet` command-line front end.
//!
//! Every command prints one `status=<ok|fail> key=value ...` line on stdout
//! and diagnostics on stderr. Exit codes: 0 success, 1 usage, 2 invalid
//! input or data, 3 numerical failure.

mod commands;

use std::ffi::OsString;
use std::fmt::Display;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dynamics::DynamicsError;
use crate::evaluation::EvalError;
use crate::nested::NestedError;
use crate::neural::NeuralError;
use crate::synthesis::SynthesisError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tumornet", version, about = "Tumor growth dynamics and nested neural classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one logistic trajectory and classify its regime.
    Simulate(SimulateArgs),
    /// Scan the growth rate and sample the attractor.
    Bifurcate(BifurcateArgs),
    /// Generate a synthetic cohort with a config sidecar.
    GenData(GenDataArgs),
    /// Train a nested model on a cohort.
    Train(TrainArgs),
    /// Evaluate a nested model on a cohort.
    Eval(EvalArgs),
    /// Compare a trained network to the Bayes posterior of two densities.
    PosteriorCheck(PosteriorArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 0.1)]
    x0: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Multiplicative Gaussian noise level.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BifurcateArgs {
    #[arg(long, default_value_t = 2.5)]
    r_min: f64,
    #[arg(long, default_value_t = 4.0)]
    r_max: f64,
    #[arg(long, default_value_t = 0.005)]
    r_step: f64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 500)]
    burn_in: usize,
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenDataArgs {
    #[arg(long)]
    benign: Option<usize>,
    #[arg(long)]
    malignant: Option<usize>,
    #[arg(long)]
    counter_examples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON cohort config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Nested,
    Novelty,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Nested => "nested",
            Mode::Novelty => "novelty",
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// JSON training config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Nested)]
    mode: Mode,
    #[arg(long)]
    log_out: Option<PathBuf>,
    /// Counter-examples added in novelty mode.
    #[arg(long)]
    counter_examples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    report: PathBuf,
    /// Defaults to the threshold stored in the model.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct PosteriorArgs {
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    mu_b: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    mu_m: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    prior_m: f64,
    /// Samples per class.
    #[arg(long, default_value_t = 5000)]
    n: usize,
    /// Comma-separated layer sizes, sigmoid throughout.
    #[arg(long, default_value = "1,8,1")]
    spec: String,
    #[arg(long, default_value_t = 0.002)]
    learning_rate: f64,
    #[arg(long, default_value_t = 600)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Display) -> Self {
        Self { code: EXIT_USAGE, message: message.to_string() }
    }

    fn invalid(message: impl Display) -> Self {
        Self { code: EXIT_INVALID, message: message.to_string() }
    }

    fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::invalid(format!("{}: {err}", path.display()))
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let code = match e {
            DynamicsError::Singular | DynamicsError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<NeuralError> for CliError {
    fn from(e: NeuralError) -> Self {
        let code = if matches!(e, NeuralError::Divergence { .. }) { EXIT_NUMERICAL } else { EXIT_INVALID };
        Self { code, message: e.to_string() }
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::Dynamics(d) => d.into(),
            other => Self::invalid(other),
        }
    }
}

impl From<NestedError> for CliError {
    fn from(e: NestedError) -> Self {
        match e {
            NestedError::Neural(n) => n.into(),
            NestedError::Synthesis(s) => s.into(),
            other => Self::invalid(other),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Neural(n) => n.into(),
            EvalError::Undefined(_) => Self { code: EXIT_NUMERICAL, message: e.to_string() },
            other => Self::invalid(other),
        }
    }
}

/// Key-value pairs for the stdout summary line.
type Summary = Vec<(&'static str, String)>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        println!("status=fail exit={EXIT_USAGE}");
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    }
                }
                _ => {
                    eprint!("{}", e.render());
                    println!("status=fail exit={EXIT_USAGE}");
                    EXIT_USAGE
                }
            };
        }
    };
    let (name, result) = match cli.command {
        Command::Simulate(a) => ("simulate", commands::simulate(a)),
        Command::Bifurcate(a) => ("bifurcate", commands::bifurcate(a)),
        Command::GenData(a) => ("gen-data", commands::gen_data(a)),
        Command::Train(a) => ("train", commands::train(a)),
        Command::Eval(a) => ("eval", commands::eval(a)),
        Command::PosteriorCheck(a) => ("posterior-check", commands::posterior_check(a)),
    };
    match result {
        Ok(summary) => {
            let fields: String = summary.iter().map(|(k, v)| format!(" {k}={v}")).collect();
            println!("status=ok command={name}{fields}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("tumornet {name}: {}", e.message);
            println!("status=fail command={name} exit={}", e.code);
            e.code
        }
    }
}
