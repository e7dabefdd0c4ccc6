mod commands;
mod config;
mod output;
mod parse;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use formavg_core::Error;

use config::{Cli, Command, ExperimentConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 invalid input, 3 over budget, 4 numerical failure, 1 anything else.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::InvalidParameter(_)
                | Error::Dimension { .. }
                | Error::Degenerate(_)
                | Error::Parse(_)
                | Error::Precondition(_)
                | Error::Resolution(_) => 2,
                Error::Budget { .. } => 3,
                Error::Numeric(_) => 4,
                Error::Io(_) => 1,
            },
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

fn load_config(cli: Cli) -> Result<ExperimentConfig, CliError> {
    match cli.command {
        Command::Run(run) => {
            let text = std::fs::read_to_string(&run.config)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", run.config.display())))?;
            let mut config = ExperimentConfig::from_toml(&text).map_err(|e| CliError::Config(e.to_string()))?;
            // flags given next to `run` override the file for output and threads
            if cli.global.out.is_some() {
                config.global.out = cli.global.out;
                config.global.format = cli.global.format;
            }
            if cli.global.threads.is_some() {
                config.global.threads = cli.global.threads;
            }
            Ok(config)
        }
        command => Ok(ExperimentConfig { global: cli.global, command }),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let print_config = cli.print_config;
    let config = load_config(cli)?;
    if print_config {
        print!("{}", config.to_toml().map_err(|e| CliError::Config(e.to_string()))?);
        return Ok(true);
    }
    if let Some(n) = config.global.threads {
        if n == 0 {
            return Err(CliError::Config("threads must be ≥ 1".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    let outcome = commands::execute(&config.command, &config.global)?;
    let seconds = start.elapsed().as_secs_f64();
    if let Some(out) = &config.global.out {
        let name = commands::name(&config.command);
        output::write(out, config.global.format, name, &config, &outcome, seconds)?;
    }
    println!("{}", outcome.summary);
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
