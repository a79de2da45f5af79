mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::Cli;
use output::Destination;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; usage text follows the message.
    Usage(String),
    /// Well-formed request that the inputs cannot satisfy.
    Validation(String),
    /// A solver, quadrature or optimizer failed.
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<eccentric::Error> for CliError {
    fn from(e: eccentric::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ECCENTRIC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("ECCENTRIC_THREADS must be a non-negative integer, got `{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot start {threads} workers: {e}")))?;
    }
    Ok(())
}

fn parse(argv: Vec<String>) -> Result<Result<Cli, clap::Error>, CliError> {
    let (argv, warnings) = config::expand(argv)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let command = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    Ok(command
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m)))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let common = cli.command.common().clone();
    let dest = match (&common.out, &common.out_dir) {
        (Some(f), _) => Destination::File(f.clone()),
        (None, Some(d)) => Destination::Dir(d.clone()),
        (None, None) => Destination::Stdout,
    };
    let config = serde_json::to_value(&cli.command)
        .map_err(|e| CliError::Validation(format!("cannot record config: {e}")))?;
    let outcome = commands::run(&cli.command)?;
    if common.verify {
        let problems = output::verify(&outcome, &dest, &config)?;
        if problems.is_empty() {
            eprintln!("verified {}: outputs match the manifest", cli.command.name());
            return Ok(());
        }
        return Err(CliError::Validation(format!("verification failed:\n  {}", problems.join("\n  "))));
    }
    output::emit(&outcome, &dest, &config)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match parse(argv) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
        Err(e) => return report(e),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    match &e {
        CliError::Usage(m) => {
            eprintln!("error: {m}\n");
            eprintln!("{}", Cli::command().render_usage());
        }
        CliError::Validation(m) => eprintln!("error: {m}"),
        CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
    }
    ExitCode::from(e.exit_code())
}
