//! `compoundcap` command-line front end.
//!
//! Exit codes: 0 ok, 1 bad input, 2 numerical failure, 3 budget exhausted.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "compoundcap", version, about = "Entanglement-assisted capacities of compound quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entanglement-assisted quantum capacity of a channel or compound.
    Capacity(CapacityArgs),
    /// Conditional entropies of a bipartite state (A is the first subsystem).
    Entropy(EntropyArgs),
    /// Monte-Carlo check of the decoupling bound for the encoder ansatz.
    Decouple(DecoupleArgs),
    /// Build and evaluate a one-shot code.
    Oneshot(OneshotArgs),
    /// Simulate estimation, feedback and coding over n uses.
    Feedback(FeedbackArgs),
    /// Evaluate closed-form bounds and code conversions.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Uninformed,
    InformedReceiver,
    InformedSender,
    Feedback,
}

#[derive(Args, Debug, Serialize)]
pub struct CapacityArgs {
    #[arg(long, conflicts_with = "compound", required_unless_present = "compound")]
    pub channel: Option<PathBuf>,
    #[arg(long)]
    pub compound: Option<PathBuf>,
    /// Which party knows the member, for compounds.
    #[arg(long, value_enum, default_value_t = VariantArg::Uninformed)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = compoundcap::capacity::DEFAULT_CAPACITY_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    /// State file holding a density `matrix` or pure `vector`, with `dims`.
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub hmin: bool,
    #[arg(long)]
    pub hmax: bool,
    /// Collision entropy with optimized conditioning state.
    #[arg(long)]
    pub h2: bool,
    /// Von Neumann conditional entropy.
    #[arg(long)]
    pub vn: bool,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[arg(long, default_value_t = compoundcap::sdp::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct CodeArgs {
    #[arg(long)]
    pub compound: PathBuf,
    /// Pure input state on (A, A′) used for every member; Φ⁺ by default.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub m0: usize,
    /// One value for all members or one per member.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m1: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Required.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecoupleArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, default_value_t = compoundcap::codes::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OneshotMode {
    /// Average-channel code with one shared encoder.
    Uninformed,
    /// Informed-sender code with per-member encoders.
    Is,
    /// Informed-sender code without entanglement assistance.
    Plain,
}

#[derive(Args, Debug, Serialize)]
pub struct OneshotArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    #[arg(long, value_enum, default_value_t = OneshotMode::Is)]
    pub mode: OneshotMode,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct FeedbackArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Total channel uses.
    #[arg(long)]
    pub n: usize,
    /// Channel uses per block of the phase-two code.
    #[arg(long, default_value_t = 1)]
    pub block: usize,
    /// Monte-Carlo trials of the estimation phase.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    /// Net cardinality: nu=REAL dab=INT, or n=INT dab=INT for ν = 1/n².
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub net: Option<Vec<String>>,
    /// Continuity rate: eps=REAL with q=REAL da=INT, or with --channel.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub continuity: Option<Vec<String>>,
    /// Converse bound for --channel over --n uses: delta=REAL.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub converse: Option<Vec<String>>,
    /// Union bound transfer: fidelity=REAL members=INT.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub union: Option<Vec<String>>,
    /// AEP smoothing penalty: eps=REAL da=INT, using --n.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub aep: Option<Vec<String>>,
    /// Superdense conversion: m0=INT m1=INT fidelity=REAL.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub superdense: Option<Vec<String>>,
    /// Teleportation conversion: messages=INT m1=INT success=REAL.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub teleport: Option<Vec<String>>,
    /// Entropy continuity: t=REAL da=INT, plus db=INT for mutual information.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    pub fannes: Option<Vec<String>>,
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = compoundcap::capacity::DEFAULT_CAPACITY_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("COMPOUNDCAP_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| compoundcap::Error::Parse { field: "COMPOUNDCAP_THREADS".into(), message: format!("`{v}` is not a count") })?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use compoundcap::Error as E;
    match e.downcast_ref::<E>() {
        Some(E::Budget(_)) => 3,
        Some(E::Solver(_) | E::Singular(_) | E::NotPartialIsometry(_)) => 2,
        Some(_) => 1,
        None if e.downcast_ref::<commands::NumericFailure>().is_some() => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let run = configure_threads().and_then(|_| match &cli.command {
        Command::Capacity(a) => commands::capacity(a),
        Command::Entropy(a) => commands::entropy(a),
        Command::Decouple(a) => commands::decouple(a),
        Command::Oneshot(a) => commands::oneshot(a),
        Command::Feedback(a) => commands::feedback(a),
        Command::Bounds(a) => commands::bounds(a),
    });
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
