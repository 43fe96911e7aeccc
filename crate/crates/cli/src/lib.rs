//! Command-line driver: argument and config handling, output files with run
//! manifests, and SVG plots.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use args::{Cli, Command};
use commands::Summary;
use config::Config;
use error::{CliError, CliResult};

/// Loads the config, applies command-line overrides, sizes the thread pool
/// and dispatches.
pub fn run(cli: &Cli) -> CliResult<Summary> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    match &cli.command {
        Command::Spectrum(a) => commands::apply_propagation(&mut cfg, &a.propagation)?,
        Command::EntropySweep(a) => commands::apply_propagation(&mut cfg, &a.propagation)?,
        _ => {}
    }
    if cfg.threads > 0 {
        // Only fails if the pool already exists, which leaves it usable.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let (out, force) = (cli.out.as_path(), cli.force);
    match &cli.command {
        Command::Space(a) => commands::space(a, &cfg, out, force),
        Command::Spectrum(a) => commands::spectrum(a, &cfg, out, force),
        Command::EntropySweep(a) => commands::entropy_sweep_cmd(a, &cfg, out, force),
        Command::Construct(a) => commands::construct(a, &cfg, out, force),
        Command::Oracle(a) => commands::oracle(a, &cfg, out, force),
        Command::Bloch(a) => commands::bloch(a, &cfg, out, force),
        Command::Hamiltonian(a) => commands::hamiltonian(a, &cfg, out, force),
    }
}

/// Process exit code for a finished run.
pub fn exit_code(result: &CliResult<Summary>) -> u8 {
    result.as_ref().map_or_else(CliError::exit_code, |_| 0)
}
