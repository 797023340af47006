use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heraldsim::scenario::{self, OutputFormat, RunOutput, ScenarioConfig, PRESETS};
use heraldsim::Error;

#[derive(Parser)]
#[command(name = "heraldsim", version, about = "Heralded multiphoton interference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve, herald and report photon statistics.
    Simulate(Common),
    /// Scan the phase and estimate the fringe period.
    Fringe(Common),
    /// Higher-order pair-source contributions and false heralds.
    Contamination(Common),
    /// Count coincidences in a pulse stream, or simulate the window profile.
    Coincidence {
        #[command(flatten)]
        common: Common,
        /// CSV with `channel,t_ns` rows.
        #[arg(long)]
        pulses: Option<PathBuf>,
    },
    /// Classical fidelity of two `outcome,probability` CSV files.
    Fidelity {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn load(&self, required: bool) -> Result<ScenarioConfig, Error> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ScenarioConfig::from_file(path)?,
            (None, Some(name)) => ScenarioConfig::preset(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?,
            (None, None) if !required => ScenarioConfig::default(),
            (None, None) => return Err(Error::Config("pass --config <file> or --preset <name>".into())),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn format(&self) -> OutputFormat {
        match self.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn run(cli: Cli) -> Result<(RunOutput, PathBuf), Error> {
    Ok(match cli.command {
        Command::Simulate(c) => (scenario::run_simulate(&c.load(true)?, c.format())?, c.out),
        Command::Fringe(c) => (scenario::run_fringe(&c.load(true)?, c.format())?, c.out),
        Command::Contamination(c) => (scenario::run_contamination(&c.load(true)?, c.format())?, c.out),
        Command::Coincidence { common, pulses } => {
            let cfg = common.load(false)?;
            (scenario::run_coincidence(&cfg, pulses.as_deref(), common.format())?, common.out)
        }
        Command::Fidelity { a, b, out } => (scenario::run_fidelity(&a, &b)?, out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli).and_then(|(output, dir)| output.write_to(&dir).map(|_| output)) {
        Ok(output) => {
            print!("{}", output.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
