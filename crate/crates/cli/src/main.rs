mod commands;
mod config;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Format;

/// Semivalue payoffs, replication sweeps and facility-location benchmarks.
#[derive(Parser)]
#[command(name = "semival", version)]
struct Cli {
    /// Seed for game generators and samplers (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file. Written to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// JSON object of parameters. Flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Total replica payoff φ^tot(k) for k = 0..=k_max.
    Sweep(commands::SweepArgs),
    /// Prefix-sum robustness verdicts for weight schemes.
    Robustness(commands::RobustnessArgs),
    /// Naive enumeration vs closed forms on generated facility games.
    FacilityBench(commands::BenchArgs),
    /// Sampled estimates against exact payoffs over several seeds.
    SampleEval(commands::SampleArgs),
    /// Submodularity and replica-redundancy checks on a game.
    Verify(commands::VerifyArgs),
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failed)) => {
            eprintln!("check failed: {failed}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Option<String>> {
    let mut file = config::load(cli.config.as_deref())?;
    let globals = config::Globals::resolve(&mut file, cli.seed, cli.out, cli.format)?;
    let (name, outcome) = match cli.command {
        Command::Sweep(a) => ("sweep", commands::sweep(config::merge(&a, &file)?, globals.seed)?),
        Command::Robustness(a) => ("robustness", commands::robustness(config::merge(&a, &file)?)?),
        Command::FacilityBench(a) => ("facility-bench", commands::facility_bench(config::merge(&a, &file)?, globals.seed)?),
        Command::SampleEval(a) => ("sample-eval", commands::sample_eval(config::merge(&a, &file)?, globals.seed)?),
        Command::Verify(a) => ("verify", commands::verify(config::merge(&a, &file)?, globals.seed)?),
    };
    let format = globals.format.unwrap_or(outcome.output.default_format);
    let meta = output::Metadata::new(name, globals.seed, outcome.echo);
    output::write(&outcome.output, &meta, format, globals.out.as_deref())?;
    Ok(outcome.failed)
}
