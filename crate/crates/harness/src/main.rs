use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use covham::{load_scenario, run_verification, OutputFormat, Suite};

#[derive(Parser)]
#[command(name = "covham", version, about = "Run verification suites on field scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one suite and write a report.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Output directory; falls back to the scenario's output.directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Threshold override, e.g. --tol green=0.1
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tolerances: Vec<String>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                println!("ok {} ({} particles, sha256 {})", scenario.display(), s.worldlines.len(), s.hash);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Run { scenario, suite, out, seed, format, tolerances } => {
            let mut sc = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            for t in &tolerances {
                if let Err(e) = sc.tolerances.apply_override(t) {
                    eprintln!("error: --tol {t}: {e}");
                    return ExitCode::FAILURE;
                }
            }
            let dir = out
                .or_else(|| sc.source.output.directory.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("covham-out"));
            let format = format.or(sc.source.output.format).unwrap_or(OutputFormat::Json);
            let report = run_verification(&sc, suite, seed);
            for r in &report.records {
                let measured = r.measured.map_or_else(|| "-".to_string(), |m| format!("{m:.3e}"));
                println!("{:<4} {:<32} measured {measured:>10}  tolerance {:.1e}", r.status, r.name, r.tolerance);
            }
            match report.write(&dir, format) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                }
                Err(e) => {
                    eprintln!("error: writing report to {}: {e}", dir.display());
                    return ExitCode::FAILURE;
                }
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
