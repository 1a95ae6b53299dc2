use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bvtrack::cli::config::CheckName;
use bvtrack::cli::{self, RunConfig, RunOutcome};

#[derive(Parser)]
#[command(name = "bvtrack", version, about = "Front tracking for balance laws with a BV flux coefficient")]
struct Args {
    #[command(subcommand)]
    verb: Verb,
    /// Run the verification checks (those listed in the config, or all).
    #[arg(long, global = true)]
    check: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Track one run and write snapshots, series and a summary.
    Run { config: PathBuf },
    /// Run a sequence of (eps, h) levels and write successive L1 distances.
    Converge { config: PathBuf },
    /// Run the verification checks only.
    Verify { config: PathBuf },
}

fn load(path: &PathBuf, check: bool) -> bvtrack::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| bvtrack::Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if !check {
        cfg.verification.checks.clear();
    } else if cfg.verification.checks.is_empty() {
        cfg.verification.checks = CheckName::ALL.to_vec();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match &args.verb {
        Verb::Run { config } => load(config, args.check).and_then(|c| cli::run(&c)),
        Verb::Converge { config } => load(config, args.check).and_then(|c| cli::converge(&c)),
        Verb::Verify { config } => load(config, true).and_then(|c| cli::verify(&c)),
    };
    match result {
        Ok(RunOutcome { summary, report }) => {
            print!("{summary}");
            match report {
                Some(r) if !r.all_passed() => {
                    if !matches!(args.verb, Verb::Verify { .. }) {
                        print!("\n{r}");
                    }
                    ExitCode::FAILURE
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("bvtrack: {e}");
            ExitCode::from(2)
        }
    }
}
