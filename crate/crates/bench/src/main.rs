//! Benchmark CLI: `run` executes a declarative experiment sweep into a CSV,
//! `report` renders log-log regret plots and slope tables from CSVs, and
//! `acceptance` runs the built-in verification suite.
//!
//! Exit codes: 0 success, 1 validation/configuration error, 2 acceptance
//! criterion failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fpa_bench::acceptance;
use fpa_bench::config::ExperimentConfig;
use fpa_bench::report;
use fpa_bench::runner;

#[derive(Parser)]
#[command(name = "fpa-bench", about = "First-price auction bidding benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (horizon, replicate) cell of an experiment config.
    Run {
        /// Path to a TOML experiment config.
        config: PathBuf,
    },
    /// Aggregate result CSVs into slope tables and SVG plots.
    Report {
        /// One or more CSV files produced by `run`.
        csvs: Vec<PathBuf>,
        /// Output directory for SVG plots.
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Run the acceptance suite and print one verdict per criterion.
    Acceptance {
        /// Only run criteria whose name contains this substring.
        #[arg(long)]
        filter: Option<String>,
        /// Deliberately bias the reward estimator (negative control for the
        /// brute-force criterion).
        #[arg(long, hide = true)]
        inject_estimator_bug: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => match cmd_run(&config) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        },
        Command::Report { csvs, out } => match cmd_report(&csvs, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        },
        Command::Acceptance {
            filter,
            inject_estimator_bug,
        } => match cmd_acceptance(filter.as_deref(), inject_estimator_bug) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        },
    }
}

fn cmd_run(path: &Path) -> anyhow::Result<()> {
    let config = ExperimentConfig::from_path(path)?;
    let rows = runner::run_experiment(&config)?;
    runner::write_csv(&config.output.csv, &rows)?;
    println!(
        "wrote {} rows to {}",
        rows.len(),
        config.output.csv.display()
    );
    Ok(())
}

fn cmd_report(csvs: &[PathBuf], out: &Path) -> anyhow::Result<()> {
    if csvs.is_empty() {
        anyhow::bail!("no CSV files given");
    }
    let mut rows = Vec::new();
    for path in csvs {
        rows.extend(runner::read_csv(path)?);
    }
    let reports = report::summarize(&rows)?;
    let names = report::write_svgs(&reports, out)?;
    print!("{}", report::summary_table(&reports));
    for name in names {
        println!("wrote {}", out.join(name).display());
    }
    Ok(())
}

fn cmd_acceptance(filter: Option<&str>, inject_bug: bool) -> anyhow::Result<bool> {
    let reports = acceptance::run_all(filter, inject_bug);
    if reports.is_empty() {
        anyhow::bail!("no criterion matches filter");
    }
    let mut all_passed = true;
    for r in &reports {
        println!("{}", r.line());
        all_passed &= r.passed;
    }
    Ok(all_passed)
}
