use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use waveforge::harness::{emit_report, load_scenario, run_scenario, ReportFormat, RunOptions, Scenario};
use waveforge::metrics::MetricReport;
use waveforge::numerics::{set_transform_path, TransformPath};
use waveforge::Error;

/// Run waveform comparison scenarios and write CSV/JSON reports.
#[derive(Parser)]
#[command(name = "waveforge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run several scenarios and write their reports side by side.
    Compare {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the scenario trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Use the direct O(N²) transform everywhere.
    #[arg(long)]
    oracle_dft: bool,
    /// Worker threads for trials (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
}

/// Loads every scenario with the command-line overrides applied.
fn load_all(paths: &[PathBuf], common: &Common) -> Result<Vec<Scenario>, Error> {
    paths
        .iter()
        .map(|path| {
            let mut s = load_scenario(path)?;
            if let Some(seed) = common.seed {
                s.seed = seed;
            }
            if let Some(trials) = common.trials {
                s.trials = trials;
            }
            s.validate()?;
            Ok(s)
        })
        .collect()
}

fn run_all(scenarios: &[Scenario], common: &Common) -> Result<Vec<MetricReport>, Error> {
    if common.oracle_dft {
        set_transform_path(TransformPath::Naive);
    }
    let opts = RunOptions {
        threads: common.threads,
    };
    let mut reports = Vec::new();
    for s in scenarios {
        reports.extend(run_scenario(s, opts)?);
    }
    Ok(reports)
}

fn write(reports: &[MetricReport], out: &Path) -> Result<(), Error> {
    emit_report(reports, ReportFormat::Csv, out)?;
    emit_report(reports, ReportFormat::Json, out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (paths, common) = match &cli.command {
        Command::Run { scenario, common } => (std::slice::from_ref(scenario), common),
        Command::Compare { scenarios, common } => (scenarios.as_slice(), common),
    };
    // Anything wrong with the inputs, including an unreadable scenario file,
    // is a configuration error.
    let scenarios = match load_all(paths, common) {
        Ok(s) => s,
        Err(e) => return fail(&e, 2),
    };
    match run_all(&scenarios, common).and_then(|r| write(&r, &common.out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_config_error() { 2 } else { 3 };
            fail(&e, code)
        }
    }
}

fn fail(e: &Error, code: u8) -> ExitCode {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
    ExitCode::from(code)
}
