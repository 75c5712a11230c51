use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hrris_core::experiment::{emit_csv, load_config, write_csv};
use hrris_core::units::watts_to_dbm;
use hrris_core::{run_sweep, Error};

/// Covert-rate sweeps for a hybrid relay-reflecting surface.
#[derive(Parser)]
#[command(name = "hrris-covert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file and write the CSV table.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; defaults to `sweep.output`, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override `sweep.trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Override `sweep.base_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_RUNTIME),
    }
}

fn run(config: PathBuf, out: Option<PathBuf>, trials: Option<usize>, seed: Option<u64>) -> ExitCode {
    let mut cfg = match load_config(&config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(t) = trials {
        cfg.sweep.trials = t;
    }
    if let Some(s) = seed {
        cfg.sweep.base_seed = s;
    }
    if let Err(e) = cfg.sweep.validate() {
        return fail(&e);
    }

    let result = match run_sweep(&cfg.params, &cfg.sweep, &cfg.settings) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let written = match out.or(cfg.sweep.output.clone()) {
        Some(path) => emit_csv(&result, &path),
        None => write_csv(&result, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    for f in &result.failures {
        eprintln!("failed: n={} k={} trial={} seed={}: {}", f.n, f.k, f.trial, f.seed, f.message);
    }
    if result.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} of {} grid points failed", result.failures.len(), result.failures.len() + result.rows.len());
        ExitCode::from(EXIT_RUNTIME)
    }
}

fn validate(config: PathBuf) -> ExitCode {
    match load_config(&config) {
        Ok(cfg) => {
            let p = &cfg.params;
            let s = &cfg.sweep;
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "config ok: {}", config.display());
            let _ = writeln!(
                out,
                "  epsilon={} L={} pa_max={:.1} dBm pr_max={:.1} dBm noise={} dBm",
                p.epsilon,
                p.channel_uses,
                watts_to_dbm(p.pa_max),
                watts_to_dbm(p.pr_max),
                p.noise_dbm
            );
            let _ = writeln!(
                out,
                "  N={:?} K={:?} trials={} base_seed={} -> {} grid points",
                s.n_values,
                s.k_values,
                s.trials,
                s.base_seed,
                s.n_values.len() * s.k_values.len() * s.trials
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // bad invocations count as configuration errors
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, out, trials, seed } => run(config, out, trials, seed),
        Command::Validate { config } => validate(config),
    }
}
