use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use htlob_cli::commands::{duration, estimate, fclt, pup, simulate};
use htlob_cli::config::{self, EstimateConfig};
use htlob_cli::{Format, Outcome, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "htlob", version, about = "Limit order book queues and their heavy-traffic limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the Monte Carlo path (or replication) count of the config.
    #[arg(long)]
    paths: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Format of tabular outputs; reports are always JSON.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Record wall-clock runtimes in the reports.
    #[arg(long)]
    timing: bool,
    /// Do not print the summary table.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            seed: self.seed,
            paths: self.paths,
            out: self.out.clone(),
            format: self.format,
            timing: self.timing,
        }
    }

    fn config<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        let path = self.config.as_ref().context("--config is required for this command")?;
        config::load(path)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an order flow and replay it through the book.
    SimulateLob(Common),
    /// Functional CLT check of the net flow along an n-ladder.
    ValidateFclt(Common),
    /// Exit-side probability: closed form against Monte Carlo on a grid.
    Pup(Common),
    /// Time to the next price change: series against Monte Carlo, tail fit.
    Duration(Common),
    /// Estimate limit parameters from an order-event CSV.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Order-event CSV with header `time,side,delta`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Print an example config for a command.
    Schema {
        #[arg(value_enum)]
        command: SchemaFor,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaFor {
    SimulateLob,
    ValidateFclt,
    Pup,
    Duration,
    Estimate,
}

fn dispatch(cmd: Command) -> Result<Option<(Outcome, bool)>> {
    let run = |c: &Common, o: Result<Outcome>| o.map(|o| Some((o, c.quiet)));
    match cmd {
        Command::SimulateLob(c) => run(&c, simulate::run(&c.config()?, &c.options())),
        Command::ValidateFclt(c) => run(&c, fclt::run(&c.config()?, &c.options())),
        Command::Pup(c) => run(&c, pup::run(&c.config()?, &c.options())),
        Command::Duration(c) => run(&c, duration::run(&c.config()?, &c.options())),
        Command::Estimate { common, input } => {
            let cfg: EstimateConfig = match &common.config {
                Some(p) => config::load(p)?,
                None => EstimateConfig::default(),
            };
            run(&common, estimate::run(&cfg, &input, &common.options()))
        }
        Command::Schema { command } => {
            print!("{}", htlob_cli::config::example(match command {
                SchemaFor::SimulateLob => simulate::COMMAND,
                SchemaFor::ValidateFclt => fclt::COMMAND,
                SchemaFor::Pup => pup::COMMAND,
                SchemaFor::Duration => duration::COMMAND,
                SchemaFor::Estimate => estimate::COMMAND,
            }).expect("every command has an example"));
            Ok(None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some((outcome, quiet))) => {
            if !quiet {
                print!("{}", outcome.report.render());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
