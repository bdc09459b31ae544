//! Batch front-end: parse an experiment config, dispatch the computation,
//! emit CSV/JSON tables.
//!
//! Exit codes: 0 ok, 2 config error, 3 precision failure, 4 domain error.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "parazeta",
    about = "Transfer-operator spectra, flat determinants and dynamical zeta \
             functions for parabolic interval maps",
    version
)]
struct Cli {
    /// Subcommand: map-info | trace | det | zeta | zeta-compare | spectrum |
    /// eigenfun | continue | lambda | pressure | check
    subcommand: String,

    /// Path to the JSON experiment config.
    #[arg(long)]
    config: std::path::PathBuf,

    /// Output file; defaults next to the config.
    #[arg(long)]
    out: Option<std::path::PathBuf>,

    /// Worker threads for the data-parallel sums (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,

    /// Print per-step diagnostics.
    #[arg(long, default_value_t = false)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.subcommand, &cli.config, cli.out.as_deref(), cli.verbose) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
