use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use substream_harness::dataset::load;
use substream_harness::report::write_atomic;
use substream_harness::verify::{run_suite, Suite};
use substream_harness::{optimum, parse_grid, run, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "substream", version, about = "Streaming submodular maximization harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and emit a JSON report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the admission log, one event per line.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run the Cartesian product of a parameter grid and emit CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the seed list of the grid.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an invariant suite: oracles, extensions, rounding, offline,
    /// threshold, extension-stream, randomized or all.
    Verify {
        suite: String,
        /// Add a supermodular fixture that must fail.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Exact optimum of a dataset by enumeration.
    Opt {
        #[arg(long)]
        dataset: String,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Serialize)]
struct OptReport {
    dataset: String,
    k: usize,
    value: f64,
    set: Option<Vec<usize>>,
    source: substream_harness::report::OptSource,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns whether every invariant held.
fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run { config, out, seed, trace } => {
            let mut cfg = RunConfig::parse(&read(&config)?)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outcome = run(&cfg, &base_of(&config), trace.is_some())?;
            if let Some(t) = trace {
                let mut text = outcome.trace.join("\n");
                text.push('\n');
                write_atomic(&t, &text)?;
            }
            emit(out.as_deref(), &(outcome.report.to_json()? + "\n"))?;
            for v in &outcome.report.violation_details {
                eprintln!("violation: {v}");
            }
            Ok(outcome.report.passed())
        }
        Command::Sweep { config, out, seed } => {
            let mut grid = parse_grid(&read(&config)?)?;
            if let Some(s) = seed {
                for c in &mut grid {
                    c.seed = s;
                }
                grid.dedup();
            }
            let res = substream_harness::sweep::sweep(&grid, &base_of(&config))?;
            emit(out.as_deref(), &res.to_csv()?)?;
            Ok(res.violations() == 0)
        }
        Command::Verify { suite, inject_fault } => {
            let results = run_suite(suite.parse::<Suite>()?, inject_fault)?;
            for r in &results {
                println!("{r}");
            }
            Ok(results.iter().all(|r| r.passed))
        }
        Command::Opt { dataset, k } => {
            let d = load(&dataset, Path::new("."))?;
            let o = optimum(&d, k)?.ok_or(HarnessError::OptUnavailable("opt"))?;
            let report = OptReport {
                dataset,
                k,
                value: o.value,
                set: o.set.map(|s| s.into_iter().map(|e| e.0).collect()),
                source: o.source,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
