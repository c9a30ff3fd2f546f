//! `expsum`: verify Newton-above-Hodge for exponential sums on curves,
//! run sweeps and the p-adic oracle, and manipulate Newton polygons.
//!
//! Exit codes: 0 success, 1 failed consistency check, 2 input error.

mod config;
mod failure;
mod polygon_cmd;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use failure::{Failure, EXIT_INPUT};
use run::{Outcome, Overrides};

#[derive(Parser)]
#[command(name = "expsum", version, about = "L-functions of exponential sums on curves over finite fields")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest field size enumerated for point sums.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Extra sums checked past the expected degree.
    #[arg(long, global = true)]
    slack: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write polygon vertices (or the sweep table) as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute L-functions and compare Newton and Hodge polygons.
    Verify { config: PathBuf },
    /// Run a parameterized family of cases (JSON lines plus a summary).
    Sweep { config: PathBuf },
    /// Compare slopes below one with the Dwork trace-formula oracle.
    Oracle { config: PathBuf },
    /// Polygon utilities.
    Polygon {
        #[command(subcommand)]
        op: PolygonOp,
    },
}

#[derive(Subcommand)]
enum PolygonOp {
    /// Lower convex hull of an `index,valuation` points file.
    Hull { points: PathBuf },
    /// Union of slope multisets.
    Concat { a: PathBuf, b: PathBuf },
    /// Keep slopes strictly below a threshold.
    Truncate {
        polygon: PathBuf,
        #[arg(long)]
        below: String,
    },
    /// Dilate by a positive rational factor.
    Scale {
        polygon: PathBuf,
        #[arg(long)]
        factor: String,
    },
    /// Whether the first polygon lies on or above the second.
    LiesAbove { a: PathBuf, b: PathBuf },
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input("Io", format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<serde_json::Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::input("Json", format!("{}: {e}", path.display())))
}

fn failed(f: Failure) -> Outcome {
    let mut body = serde_json::to_string_pretty(&f.to_json()).expect("serializes");
    body.push('\n');
    Outcome {
        body,
        csv: None,
        code: f.code,
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let ov = Overrides {
        budget: cli.budget,
        slack: cli.slack,
    };
    let result = match &cli.cmd {
        Command::Verify { config } => read_json(config).map(|v| run::verify(v, ov)),
        Command::Sweep { config } => read_json(config).map(|v| run::sweep(v, ov)),
        Command::Oracle { config } => read_json(config).map(|v| run::oracle(v, ov)),
        Command::Polygon { op } => match op {
            PolygonOp::Hull { points } => read(points).and_then(|t| polygon_cmd::hull(&t)),
            PolygonOp::Concat { a, b } => {
                read(a).and_then(|a| read(b).and_then(|b| polygon_cmd::concat(&a, &b)))
            }
            PolygonOp::Truncate { polygon, below } => {
                read(polygon).and_then(|t| polygon_cmd::truncate(&t, below))
            }
            PolygonOp::Scale { polygon, factor } => {
                read(polygon).and_then(|t| polygon_cmd::scale(&t, factor))
            }
            PolygonOp::LiesAbove { a, b } => {
                read(a).and_then(|a| read(b).and_then(|b| polygon_cmd::lies_above(&a, &b)))
            }
        },
    };
    result.unwrap_or_else(failed)
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Verify { .. } => "verify",
        Command::Sweep { .. } => "sweep",
        Command::Oracle { .. } => "oracle",
        Command::Polygon { .. } => "polygon",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("expsum: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let start = Instant::now();
    let outcome = dispatch(&cli);

    let written = match &cli.out {
        Some(path) => std::fs::write(path, &outcome.body),
        None => {
            print!("{}", outcome.body);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("expsum: cannot write report: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    if let (Some(path), Some(csv)) = (&cli.csv, &outcome.csv) {
        if let Err(e) = std::fs::write(path, csv) {
            eprintln!("expsum: cannot write CSV: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    eprintln!(
        "expsum {} {}: exit {} in {:.3}s",
        env!("CARGO_PKG_VERSION"),
        command_name(&cli.cmd),
        outcome.code,
        start.elapsed().as_secs_f64()
    );
    ExitCode::from(outcome.code)
}
