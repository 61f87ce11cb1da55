//! `grass` command line: generate instances, collect runtime labels, build
//! graph features, train the selector, pick solvers, benchmark baselines
//! and run the permutation study.

mod cmd;
mod opts;

use clap::Parser;

/// Exit code for usage errors (bad flags, malformed templates).
const EXIT_USAGE: i32 = 1;
/// Exit code for data errors (unreadable files, malformed inputs).
const EXIT_DATA: i32 = 2;

#[derive(Parser)]
#[command(
    name = "grass",
    about = "Runtime-aware SAT solver selection toolkit",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: cmd::Command,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    // Map clap's parse failures onto exit code 1 (its default is 2, which
    // we reserve for data errors). Help/version remain successful exits.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { EXIT_USAGE };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    match cmd::run(cli.command) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err.is::<opts::UsageError>() { EXIT_USAGE } else { EXIT_DATA };
            std::process::exit(code);
        }
    }
}
