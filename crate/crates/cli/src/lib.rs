//! Command-line front door: config parsing, dispatch, exit-code mapping.
//!
//! Exit codes: 0 success, 1 certificate or selftest failure, 2 config error,
//! 3 numeric failure.

pub mod commands;
pub mod config;
pub mod report;

use clap::Parser;
use config::RunConfig;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "pfbind",
    about = "Enhanced-binding numerics: critical couplings, truncated self-energy, binding certificates"
)]
pub struct Cli {
    /// lambda0 | eta2 | sigma0 | certify | sweep | selftest
    pub command: String,
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for reports and tables.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweep points (0 = library default).
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the quadrature tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Run with already-parsed arguments; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let mut cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = cli.tol {
        if tol <= 0.0 {
            eprintln!("config error: --tol must be > 0");
            return EXIT_CONFIG;
        }
        cfg.tol = tol;
    }
    let known = ["lambda0", "eta2", "sigma0", "certify", "sweep", "selftest"];
    if !known.contains(&cli.command.as_str()) {
        eprintln!(
            "config error: unknown command `{}` (expected one of {:?})",
            cli.command, known
        );
        return EXIT_CONFIG;
    }
    if cli.threads > 0 {
        // A second initialization in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match commands::dispatch(&cli.command, &cfg, &cli.out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("numeric failure: {e:#}");
            EXIT_NUMERIC
        }
    }
}

pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            // clap usage errors are argument problems, not numeric ones
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}
