use std::path::PathBuf;
use std::process::ExitCode;

use aggint_cli::{
    cmd_analyze, cmd_compare, cmd_des, cmd_sample, presets, CliResult, ExperimentConfig, RunSummary,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aggint",
    version,
    about = "Aggregate interference in random CSMA/CA networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file (flat key = value; lists for sweeps).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in preset: fig1, fig3, fig4, fig5-6, fig7-8. A --config file
    /// is applied on top of it.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[arg(long, global = true, value_name = "N")]
    repetitions: Option<usize>,

    #[arg(long = "duration-us", global = true, value_name = "N")]
    duration_us: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Busy probability, effective density and interference law per sweep point.
    Analyze,
    /// Monte Carlo aggregate interference of PPP / MHC / SSI patterns.
    Sample,
    /// Packet-level DCF simulation of random topologies.
    Des,
    /// KS distances between simulation, analysis and point-process samples.
    Compare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Sample => "sample",
            Command::Des => "des",
            Command::Compare => "compare",
        }
    }
}

fn resolve(cli: &Cli) -> CliResult<ExperimentConfig> {
    let mut text = match &cli.preset {
        Some(name) => presets::source(name)?.to_string(),
        None => String::new(),
    };
    if let Some(path) = &cli.config {
        let extra = std::fs::read_to_string(path).map_err(|e| aggint_cli::CliError::io(path, e))?;
        // Later keys win: merge the two tables rather than concatenating.
        let mut base: toml::Table = toml::from_str(&text).expect("presets are valid");
        let over: toml::Table = toml::from_str(&extra)
            .map_err(|e| aggint_cli::CliError::Config(format!("{}: {e}", path.display())))?;
        base.extend(over);
        text = toml::to_string(&base).expect("table serializes");
    }
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(r) = cli.repetitions {
        cfg.repetitions = r;
    }
    if let Some(d) = cli.duration_us {
        cfg.duration_us = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<RunSummary> {
    let cfg = resolve(cli)?;
    match cli.command {
        Command::Analyze => cmd_analyze(&cfg),
        Command::Sample => cmd_sample(&cfg),
        Command::Des => cmd_des(&cfg),
        Command::Compare => cmd_compare(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            for note in &summary.notes {
                eprintln!("note: {note}");
            }
            for file in &summary.files {
                println!("{}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.summary(cli.command.name()));
            ExitCode::FAILURE
        }
    }
}
