use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reqroi_cli::commands::{
    cmd_eas1, cmd_eas2, cmd_fetch, cmd_prepare, cmd_report, cmd_synth, render_table, RunOutput,
};
use reqroi_cli::config::{Overrides, RunConfig};
use reqroi_cli::CliError;
use reqroi_core::active::QueryStrategy;
use reqroi_core::roi::BenefitMode;

#[derive(Parser)]
#[command(
    name = "reqroi",
    version,
    about = "ROI analytics for requirements-dependency classification"
)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Query strategy compared against the Random baseline.
    #[arg(long, global = true, value_parser = parse_strategy)]
    strategy: Option<QueryStrategy>,
    /// ROI benefit mode for the active-learning study.
    #[arg(long, global = true, value_parser = parse_mode)]
    mode: Option<BenefitMode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic records corpus.
    Synth,
    /// Fetch records from a Bugzilla-compatible REST endpoint.
    Fetch {
        /// Serve a recorded JSON response instead of the network.
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Build labeled pairs and the balanced train/test split.
    Prepare,
    /// Training-fraction sweep with NB and RF.
    Eas1,
    /// Active learning against the random baseline.
    Eas2,
    /// Merge ROI curve files into one plot-ready table.
    Report {
        #[arg(required = true)]
        curves: Vec<PathBuf>,
    },
}

fn parse_strategy(s: &str) -> Result<QueryStrategy, String> {
    s.parse().map_err(|e: reqroi_core::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<BenefitMode, String> {
    s.parse().map_err(|e: reqroi_core::Error| e.to_string())
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    config.apply(&Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        strategy: cli.strategy,
        mode: cli.mode,
    });
    Ok(config)
}

fn report_files(out: &RunOutput) {
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Synth => report_files(&cmd_synth(&config)?),
        Command::Fetch { fixture } => report_files(&cmd_fetch(&config, fixture.as_deref())?),
        Command::Prepare => report_files(&cmd_prepare(&config)?),
        Command::Eas1 => report_files(&cmd_eas1(&config)?),
        Command::Eas2 => report_files(&cmd_eas2(&config)?),
        Command::Report { curves } => {
            let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let (out, summaries) = cmd_report(curves, &dir)?;
            print!("{}", render_table(&summaries));
            report_files(&out);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
