//! `rdiscord`: Rényi discord time series, sweeps and plateau detection.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 invalid configuration or
//! input, 3 numerical failure.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rdiscord_core::experiment::{
    self, detect_plateau, read_series_csv, ExperimentConfig, PlateauSettings,
};
use rdiscord_core::Error;

#[derive(Parser)]
#[command(
    name = "rdiscord",
    version,
    about = "Rényi discord of two dephasing dimers"
)]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discord time series for a config without a sweep section.
    Timeseries {
        config: PathBuf,
        /// Output CSV (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// One time series per sweep value, stacked with a sweep_value column.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Detect freezing plateaus in a timeseries or sweep CSV; prints JSON.
    Plateau {
        input: PathBuf,
        #[arg(long, default_value_t = PlateauSettings::default().abs_tol)]
        tol: f64,
        #[arg(long, default_value_t = PlateauSettings::default().min_points)]
        min_points: usize,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

enum Failure {
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn io_failure(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_failure(path))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn with_output<F>(output: Option<&Path>, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path).map_err(io_failure(path))?);
            write(&mut out)
                .and_then(|_| out.flush())
                .map_err(io_failure(path))
        }
        None => {
            let stdout = io::stdout();
            write(&mut stdout.lock()).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Io(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Timeseries { config, output } => {
            let rows = experiment::run_timeseries(&load_config(&config)?)?;
            with_output(output.as_deref(), |w| {
                experiment::write_timeseries_csv(&rows, w)
            })
        }
        Command::Sweep { config, output } => {
            let rows = experiment::run_sweep(&load_config(&config)?)?;
            with_output(output.as_deref(), |w| experiment::write_sweep_csv(&rows, w))
        }
        Command::Plateau {
            input,
            tol,
            min_points,
        } => {
            PlateauSettings {
                abs_tol: tol,
                min_points,
            }
            .check()?;
            let series = read_series_csv(File::open(&input).map_err(io_failure(&input))?)?;
            let mut reports = Vec::with_capacity(series.len());
            for s in &series {
                let report = detect_plateau(&s.points, tol, min_points)?;
                reports.push(serde_json::json!({
                    "sweep_value": s.sweep_value,
                    "intervals": report.intervals,
                    "series_max": report.series_max,
                }));
            }
            let text = serde_json::to_string_pretty(&reports).expect("report serializes");
            println!("{text}");
            Ok(())
        }
        Command::Validate { config } => {
            load_config(&config)?.validate()?;
            println!("{}: ok", config.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
