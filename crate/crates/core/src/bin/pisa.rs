use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pisa_core::cost::{bus_sweep_csv, pipeline_report_with};
use pisa_core::pipeline::{Pipeline, PipelineError};
use pisa_core::spec::{load_pipeline_file, SpecError};
use pisa_core::trace::{read_input_trace, write_trace};

#[derive(Parser)]
#[command(
    name = "pisa",
    version,
    about = "Replay packet traces through a PISA pipeline model and estimate FPGA costs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay an input trace through the pipeline.
    Run {
        spec: PathBuf,
        trace: PathBuf,
        /// Output trace file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write run statistics as JSON (default: standard error).
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Override the spec's hash seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the cost report for a spec.
    Report {
        spec: PathBuf,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        /// Emit the bus-width sweep CSV instead of the report.
        #[arg(long)]
        sweep_bus: bool,
    },
    /// Check a spec and list every violation.
    Validate { spec: PathBuf },
}

const EXIT_SPEC: u8 = 1;
const EXIT_TRACE: u8 = 2;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("pisa: {msg}");
    ExitCode::from(code)
}

fn write_or_print(path: Option<&Path>, text: &str, to_stderr: bool) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None if to_stderr => {
            eprint!("{text}");
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(spec: &Path, trace: &Path, out: Option<&Path>, stats: Option<&Path>, seed: Option<u64>) -> ExitCode {
    let pipeline = match Pipeline::from_file(spec, seed) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_SPEC, e),
    };
    let text = match std::fs::read_to_string(trace) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_TRACE, format!("{}: {e}", trace.display())),
    };
    let packets = match read_input_trace(&text) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_TRACE, format!("{}: {e}", trace.display())),
    };
    let result = pipeline.run(&packets);
    let mut stats_json = result.stats.to_json();
    stats_json.push('\n');
    if let Err(e) = write_or_print(out, &write_trace(&result.outputs), false) {
        return fail(EXIT_SPEC, e);
    }
    if let Err(e) = write_or_print(stats, &stats_json, true) {
        return fail(EXIT_SPEC, e);
    }
    ExitCode::SUCCESS
}

fn report(spec: &Path, json: bool, sweep: bool) -> ExitCode {
    let pipeline = match Pipeline::from_file(spec, None) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_SPEC, e),
    };
    if sweep {
        print!("{}", bus_sweep_csv(&pipeline.spec().platform));
        return ExitCode::SUCCESS;
    }
    let r = pipeline_report_with(pipeline.spec(), &pipeline.lpm_node_counts());
    if json {
        println!("{}", r.to_json());
    } else {
        print!("{}", r.to_text());
    }
    ExitCode::SUCCESS
}

fn validate(spec: &Path) -> ExitCode {
    match load_pipeline_file(spec) {
        Ok(s) => {
            println!(
                "{}: ok ({} headers, {} tables)",
                spec.display(),
                s.headers.len(),
                s.tables.len()
            );
            ExitCode::SUCCESS
        }
        Err(SpecError::Invalid(report)) => {
            eprintln!("{}: invalid", spec.display());
            eprint!("{report}");
            ExitCode::from(EXIT_SPEC)
        }
        Err(e) => fail(EXIT_SPEC, PipelineError::from(e)),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            spec,
            trace,
            out,
            stats,
            seed,
        } => run(&spec, &trace, out.as_deref(), stats.as_deref(), seed),
        Command::Report {
            spec, json, sweep_bus, ..
        } => report(&spec, json, sweep_bus),
        Command::Validate { spec } => validate(&spec),
    }
}
