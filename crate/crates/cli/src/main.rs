//! `gaussim`: validate, run, sample, cross-check and benchmark Gaussian circuits.
//!
//! Exit codes: 0 success, 1 validation or comparison failure, 2 usage error,
//! 3 I/O or parse error. Errors go to standard error as one line of JSON.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussim::circuit::{self, Circuit, Diagnostic};
use gaussim::{bench, RandomSource};
use gaussim_fock::corpus;
use serde::Serialize;
use serde_json::json;

const DEFAULT_CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../fock/corpus");

#[derive(Parser, Debug)]
#[command(name = "gaussim", version, about = "Gaussian quantum-optics circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a circuit file and list diagnostics.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run one trajectory and print the full result.
    Run {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run many trajectories and summarize each measurement label.
    Sample {
        input: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the engine with the Fock-space oracle on a corpus directory.
    OracleCheck {
        #[arg(long, default_value = DEFAULT_CORPUS)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Time random gate sequences over a sweep of mode counts up to `--modes`.
    Bench {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..=100_000))]
        modes: u64,
        #[arg(long, default_value_t = 1000)]
        ops: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// A failure with its exit code and a JSON payload for standard error.
struct Failure {
    code: u8,
    body: serde_json::Value,
}

impl Failure {
    fn io(path: &Path, err: impl std::fmt::Display) -> Failure {
        Failure {
            code: 3,
            body: json!({"error": "io", "path": path.display().to_string(), "message": err.to_string()}),
        }
    }

    fn engine(err: gaussim::Error) -> Failure {
        Failure { code: 1, body: json!({"error": "execution", "message": err.to_string()}) }
    }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path) -> Result<Circuit, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    circuit::parse(&text).map_err(|e| Failure {
        code: 3,
        body: json!({
            "error": "parse",
            "path": path.display().to_string(),
            "line": e.line,
            "column": e.column,
            "message": e.message,
        }),
    })
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("output is serializable");
    writeln!(out, "{text}").map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

fn write_csv<T: Serialize>(out: &mut dyn Write, rows: &[T], header: &[&str]) -> Result<(), Failure> {
    let mut w = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(out);
    let fail = |e: csv::Error| Failure::io(Path::new("<stdout>"), e);
    if rows.is_empty() {
        w.write_record(header).map_err(fail)?;
    }
    for row in rows {
        w.serialize(row).map_err(fail)?;
    }
    w.flush().map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

#[derive(Serialize)]
struct DiagnosticRow<'a> {
    index: usize,
    message: &'a str,
}

fn validate(input: &Path, format: Format, out: &mut dyn Write) -> Outcome {
    let c = load(input)?;
    let diagnostics: Vec<Diagnostic> = circuit::validate(&c);
    match format {
        Format::Json => write_json(out, &json!({"valid": diagnostics.is_empty(), "diagnostics": diagnostics}))?,
        Format::Csv => {
            let rows: Vec<DiagnosticRow> = diagnostics
                .iter()
                .map(|d| DiagnosticRow { index: d.index, message: &d.message })
                .collect();
            write_csv(out, &rows, &["index", "message"])?
        }
    }
    Ok(u8::from(!diagnostics.is_empty()))
}

#[derive(Serialize)]
struct RecordRow<'a> {
    label: &'a str,
    value: f64,
}

fn run(input: &Path, seed: u64, format: Format, out: &mut dyn Write) -> Outcome {
    let c = load(input)?;
    let result = circuit::execute(&c, &mut RandomSource::new(seed)).map_err(Failure::engine)?;
    match format {
        Format::Json => write_json(out, &result)?,
        Format::Csv => {
            let rows: Vec<RecordRow> = result
                .record
                .entries()
                .iter()
                .map(|e| RecordRow { label: &e.label, value: e.value })
                .collect();
            write_csv(out, &rows, &["label", "value"])?
        }
    }
    Ok(0)
}

fn sample(input: &Path, shots: u64, seed: u64, format: Format, out: &mut dyn Write) -> Outcome {
    let c = load(input)?;
    let result = circuit::sample(&c, shots as usize, seed).map_err(Failure::engine)?;
    match format {
        Format::Json => write_json(
            out,
            &json!({"seed": result.seed, "shots": result.shots, "summary": result.summary}),
        )?,
        Format::Csv => write_csv(out, &result.summary, &["label", "count", "mean", "variance"])?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct CorpusRow {
    name: String,
    modes: usize,
    truncation: usize,
    means_deviation: f64,
    covariance_deviation: f64,
    stored_deviation: f64,
    top_population: f64,
    seconds: f64,
    passed: bool,
}

fn oracle_check(dir: &Path, tol: f64, format: Format, out: &mut dyn Write) -> Outcome {
    if !(tol > 0.0) {
        return Err(Failure { code: 2, body: json!({"error": "usage", "message": "--tol must be positive"}) });
    }
    let entries = corpus::load(dir).map_err(|e| Failure::io(dir, e))?;
    let mut rows = Vec::new();
    for entry in &entries {
        let report = corpus::check(entry, tol).map_err(|e| Failure {
            code: 1,
            body: json!({"error": "oracle", "entry": entry.name, "message": e.to_string()}),
        })?;
        rows.push(CorpusRow {
            name: report.name,
            modes: report.modes,
            truncation: report.truncation,
            means_deviation: report.oracle.means_deviation,
            covariance_deviation: report.oracle.covariance_deviation,
            stored_deviation: report.stored_means_deviation.max(report.stored_covariance_deviation),
            top_population: report.oracle.top_population,
            seconds: report.seconds,
            passed: report.passed,
        });
    }
    let all = !rows.is_empty() && rows.iter().all(|r| r.passed);
    match format {
        Format::Json => write_json(out, &json!({"tol": tol, "passed": all, "entries": rows}))?,
        Format::Csv => write_csv(
            out,
            &rows,
            &["name", "modes", "truncation", "means_deviation", "covariance_deviation",
              "stored_deviation", "top_population", "seconds", "passed"],
        )?,
    }
    Ok(u8::from(!all))
}

fn run_bench(modes: usize, ops: usize, seed: u64, format: Format, out: &mut dyn Write) -> Outcome {
    let rows = bench::sweep(modes, ops, seed).map_err(Failure::engine)?;
    match format {
        Format::Json => write_json(out, &rows)?,
        Format::Csv => write_csv(
            out,
            &rows,
            &["modes", "ops", "seconds", "resource_count", "means", "covariance_entries"],
        )?,
    }
    Ok(0)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Validate { input, out: o } => validate(&input, o.format, out),
        Command::Run { input, seed, out: o } => run(&input, seed, o.format, out),
        Command::Sample { input, shots, seed, out: o } => sample(&input, shots, seed, o.format, out),
        Command::OracleCheck { corpus, tol, out: o } => oracle_check(&corpus, tol, o.format, out),
        Command::Bench { modes, ops, seed, out: o } => run_bench(modes as usize, ops, seed, o.format, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let message = e.render().to_string();
            eprintln!("{}", json!({"error": "usage", "message": message.trim()}));
            return ExitCode::from(2);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match dispatch(cli, &mut lock) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let _ = lock.flush();
            eprintln!("{}", f.body);
            ExitCode::from(f.code)
        }
    }
}
