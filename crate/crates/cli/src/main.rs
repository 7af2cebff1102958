//! `binrd`: rate-distortion curves for a binary source with side information
//! from a binary asymmetric channel.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 1 I/O error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use binrd::{RdError, ReconstructionRule};
use clap::{ArgGroup, Args, Parser, Subcommand};

use output::Format;

#[derive(Parser)]
#[command(name = "binrd", version, about, propagate_version = true)]
struct Cli {
    /// Output encoding [default: json for simulate, csv otherwise]
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Cap on worker threads
    #[arg(long, env = "RD_THREADS", global = true)]
    threads: Option<usize>,

    /// Also write a gnuplot script skeleton next to the output files
    #[arg(long, global = true)]
    gnuplot_stub: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate-distortion function with side information at both ends
    Predictive(PredictiveArgs),
    /// Binary-auxiliary Wyner-Ziv bound: star curve, envelope, trajectory
    Wz(WzArgs),
    /// Blahut-Arimoto Wyner-Ziv curve with a convergence log
    Ba(BaArgs),
    /// Rate loss of one channel, or a sweep over symmetric channels
    RateLoss(RateLossArgs),
    /// Monte-Carlo estimate of the decoder distortion
    Simulate(SimulateArgs),
}

#[derive(Args)]
pub struct ChannelArgs {
    /// p(Y=1 | X=0)
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// p(Y=0 | X=1)
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Args)]
pub struct PredictiveArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Number of distortion points, including 0 and D_max
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Output file (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct WzArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = binrd::wz::DEFAULT_GRID)]
    pub points: usize,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the (p, q)-plane region map
    #[arg(long)]
    pub regions: bool,
    /// Side of the region-map grid
    #[arg(long, default_value_t = 64, requires = "regions")]
    pub grid: usize,
}

#[derive(Args)]
pub struct BaArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Auxiliary alphabet size
    #[arg(long, default_value_t = 3)]
    pub card: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of log-spaced slopes
    #[arg(long, default_value_t = 64)]
    pub lambdas: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Exit with code 3 if any slope fails to converge
    #[arg(long)]
    pub strict: bool,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["a", "bsc_sweep"])))]
pub struct RateLossArgs {
    #[arg(long, requires = "b", allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, requires = "a", allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Symmetric channels t0, ..., t1 in `steps` points, e.g. 0.01:0.49:97
    #[arg(long, value_parser = parse_sweep, conflicts_with_all = ["a", "b"])]
    pub bsc_sweep: Option<SweepSpec>,
    #[arg(long, default_value_t = binrd::wz::DEFAULT_GRID)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the JSON summary (defaults next to --out, else stderr)
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    pub b: f64,
    /// p(U=1 | X=0)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub p: f64,
    /// p(U=0 | X=1)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    /// Decoder: auto picks the argmax rule for (p, q)
    #[arg(long, default_value = "auto", value_parser = parse_rule)]
    pub rule: RuleChoice,
    /// Number of samples
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.t0];
        }
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.t1
                } else {
                    self.t0 + (self.t1 - self.t0) * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

fn parse_sweep(s: &str) -> Result<SweepSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [t0, t1, steps] = parts[..] else {
        return Err("expected t0:t1:steps".into());
    };
    let t0: f64 = t0.parse().map_err(|e| format!("t0: {e}"))?;
    let t1: f64 = t1.parse().map_err(|e| format!("t1: {e}"))?;
    let steps: usize = steps.parse().map_err(|e| format!("steps: {e}"))?;
    let open = |t: f64| t > 0.0 && t < 0.5;
    if !(open(t0) && open(t1)) {
        return Err(format!(
            "sweep bounds must lie in (0, 0.5), got {t0} and {t1}"
        ));
    }
    if t1 < t0 || steps == 0 || (steps == 1 && t1 != t0) {
        return Err("need t0 <= t1 and at least one step (two if t0 < t1)".into());
    }
    Ok(SweepSpec { t0, t1, steps })
}

#[derive(Debug, Clone, Copy)]
pub enum RuleChoice {
    Auto,
    Fixed(ReconstructionRule),
}

fn parse_rule(s: &str) -> Result<RuleChoice, String> {
    if s == "auto" {
        return Ok(RuleChoice::Auto);
    }
    s.parse()
        .map(RuleChoice::Fixed)
        .map_err(|_| format!("unknown rule {s:?}; expected auto, u, or, and or y"))
}

/// Global flags every command sees.
pub struct Common {
    pub format: Format,
    pub gnuplot_stub: bool,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<RdError> for CliError {
    fn from(e: RdError) -> Self {
        match e {
            RdError::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let default_format = match cli.command {
        Command::Simulate(_) => Format::Json,
        _ => Format::Csv,
    };
    let common = Common {
        format: cli.format.unwrap_or(default_format),
        gnuplot_stub: cli.gnuplot_stub,
    };
    match cli.command {
        Command::Predictive(args) => commands::predictive(&common, args),
        Command::Wz(args) => commands::wz(&common, args),
        Command::Ba(args) => commands::ba(&common, args),
        Command::RateLoss(args) => commands::rate_loss(&common, args),
        Command::Simulate(args) => commands::simulate(&common, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("binrd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
