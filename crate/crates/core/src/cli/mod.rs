//! Command-line orchestration: `preprocess`, `split`, `train-baseline`,
//! `evaluate`.

mod commands;
mod config;

pub use commands::{cmd_evaluate, cmd_preprocess, cmd_split, cmd_train_baseline, Outcome};
pub use config::{Cli, Command, GlobalArgs, RunConfig};

use log::error;

/// Exit status: 0 success, 1 partial per-item failure, 2 configuration
/// error or abort.
pub fn run(cli: Cli) -> i32 {
    let config = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            error!("configuration: {e}");
            return 2;
        }
    };
    let result = match cli.command {
        Command::Preprocess => cmd_preprocess(&config),
        Command::Split => cmd_split(&config),
        Command::TrainBaseline => cmd_train_baseline(&config),
        Command::Evaluate => cmd_evaluate(&config),
    };
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            error!("{e}");
            2
        }
    }
}
