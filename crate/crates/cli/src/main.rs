mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jamsim::numeric::DEFAULT_DIGITS;
use jamsim::{GoldenNumber, PolicyKind};

use scenario::{ScenarioArgs, ScenarioName};

/// Online packet scheduling under adversarial jamming.
///
/// Every number accepts the exact literal format `a/b + c/d*phi`.
#[derive(Parser, Debug)]
#[command(name = "jamsim", version, about)]
struct Cli {
    /// Decimal places in reports and CSV files.
    #[arg(long, global = true, default_value_t = DEFAULT_DIGITS)]
    digits: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one policy once and print its ratio report.
    Simulate(SimulateArgs),
    /// Measured ratios of the hard scenarios across a speed grid.
    Sweep(SweepArgs),
    /// Run an adaptive lower-bound adversary against a policy.
    Lowerbound(LowerboundArgs),
    /// Lemma and segment audits over seeded random instances.
    Audit(AuditArgs),
    /// Exhaustive offline optimum of a small instance.
    Opt(OptArgs),
    /// Write a static scenario in the instance file format.
    Export(ExportArgs),
}

pub(crate) fn parse_g(s: &str) -> Result<GoldenNumber, String> {
    s.parse::<GoldenNumber>().map_err(|e| e.to_string())
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse::<PolicyKind>().map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_policy, default_value = "main")]
    policy: PolicyKind,
    #[arg(long, value_parser = parse_g, default_value = "1")]
    speed: GoldenNumber,
    #[command(flatten)]
    source: ScenarioArgs,
    /// Additive constant A of the report; `6kl` stands for 6·k·ℓ_k.
    #[arg(long, default_value = "0")]
    additive: String,
    /// Trace CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// `start:stop:step` or a comma list, within [1, 8].
    #[arg(long, default_value = "1:8:1/4")]
    grid: String,
    #[command(flatten)]
    params: scenario::ScenarioParams,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LowerboundArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioName,
    #[arg(long, value_parser = parse_policy, default_value = "main")]
    policy: PolicyKind,
    #[arg(long, value_parser = parse_g)]
    speed: GoldenNumber,
    #[command(flatten)]
    params: scenario::ScenarioParams,
    /// Per-block case CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lemma-audit instances; each is run under MAIN and DIV.
    #[arg(long, default_value_t = 1000)]
    runs: u64,
    /// Segment-audit instances per speed.
    #[arg(long, default_value_t = 200)]
    segment_runs: u64,
    /// Audit one deliberately broken trace instead; must report a violation.
    #[arg(long)]
    corrupt: bool,
    /// Summary CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV of every failed check.
    #[arg(long)]
    violations: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptArgs {
    /// Speed the scenario generator is built for; OPT itself runs at 1.
    #[arg(long, value_parser = parse_g, default_value = "1")]
    speed: GoldenNumber,
    #[command(flatten)]
    source: ScenarioArgs,
    /// Schedule CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long, value_parser = parse_g, default_value = "1")]
    speed: GoldenNumber,
    #[command(flatten)]
    source: ScenarioArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let d = cli.digits;
    let run = match cli.command {
        Command::Simulate(a) => commands::simulate(a, d),
        Command::Sweep(a) => commands::sweep(a, d),
        Command::Lowerbound(a) => commands::lowerbound(a, d),
        Command::Audit(a) => commands::audit(a, d),
        Command::Opt(a) => commands::opt(a, d),
        Command::Export(a) => commands::export(a),
    };
    match run {
        Ok(true) => ExitCode::SUCCESS,
        // a false verdict or an audit violation
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
