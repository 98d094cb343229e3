//! `bqlab`: run scenarios, verify estimate suites, merge run ledgers.
//!
//! Exit codes: 0 success, 1 failed checks or runtime trouble, 2 bad usage
//! or configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bqlab_cli::{reporting, simulate, suites};
use bqlab_core::{Error, Result};

#[derive(Parser)]
#[command(name = "bqlab", version, about = "Spectral flow runs and estimate verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one scenario file and write its diagnostics.
    Simulate {
        /// Scenario TOML path.
        #[arg(long)]
        config: PathBuf,
        /// Output parent directory, overriding the scenario's own choice.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite; prints one line per check.
    Verify {
        /// One of: harmonic, semigroup, transport, boussinesq, smalldata3d.
        #[arg(long)]
        suite: String,
        /// Base seed for randomized checks.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Where to write the suite result as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge every run ledger under a directory into one table per kind.
    Report {
        /// Directory scanned recursively for ledgers.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Err(e) = thread_policy() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// The numerics are single threaded so runs are bitwise reproducible;
/// only a thread count of one is accepted.
fn thread_policy() -> Result<()> {
    match std::env::var("BQLAB_THREADS") {
        Err(_) => Ok(()),
        Ok(v) if v == "1" || v.is_empty() => Ok(()),
        Ok(v) => Err(Error::Config(format!(
            "BQLAB_THREADS={v} is not supported: runs are single threaded \
             so results are bitwise reproducible; unset it or set it to 1"
        ))),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::GridMismatch(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Simulate { config, out } => {
            let dir = simulate::cmd_simulate(&config, out.as_deref())?;
            println!("wrote {}", dir.display());
            Ok(true)
        }
        Cmd::Verify { suite, seed, out } => cmd_verify(&suite, seed, out.as_deref()),
        Cmd::Report { dir } => {
            for path in reporting::cmd_report(&dir)? {
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
    }
}

fn cmd_verify(suite: &str, seed: u64, out: Option<&Path>) -> Result<bool> {
    let result = suites::run_suite(suite, seed)?;
    for rep in &result.reports {
        println!(
            "{} {} lhs {:.6e} rhs {:.6e} C {:.6e}",
            if rep.pass { "PASS" } else { "FAIL" },
            rep.inequality_id,
            rep.lhs,
            rep.rhs,
            rep.fitted_c
        );
    }
    println!(
        "suite {}: {} ({} checks, {:.1}s)",
        result.suite,
        if result.passed { "PASS" } else { "FAIL" },
        result.reports.len(),
        result.runtime_seconds
    );
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&result)
            .map_err(|e| Error::Config(format!("cannot serialize suite result: {e}")))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(result.passed)
}
