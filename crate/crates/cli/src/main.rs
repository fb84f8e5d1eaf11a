//! `marginloss` command-line driver. Run `marginloss --help` for the input
//! and output schemas.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, DiagnoseCommand, LossesCommand};
use output::{CliResult, Failure};

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            return Err(Failure::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Validation(e.to_string()))?;
    }
    let global = &cli.global;
    match &cli.command {
        Command::Losses(LossesCommand::Tabulate(a)) => commands::losses_tabulate(global, a),
        Command::Losses(LossesCommand::Check(a)) => commands::losses_check(a),
        Command::Fit(a) => commands::fit_command(global, a),
        Command::PnormFit(a) => commands::pnorm_fit_command(global, a),
        Command::Boost(a) => commands::boost(global, a),
        Command::Simulate(a) => commands::simulate(global, a),
        Command::Diagnose(DiagnoseCommand::Residuals(a)) => commands::diagnose_residuals(global, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("{}", Failure::Validation(first.to_string()).to_json_line());
            return ExitCode::from(output::EXIT_VALIDATION);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.to_json_line());
            ExitCode::from(failure.exit_code())
        }
    }
}
