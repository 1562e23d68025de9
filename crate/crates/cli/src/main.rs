//! `varlp` command-line front end.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varlp::experiment::{execute, schema_doc, Command, ExperimentConfig};
use varlp::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "varlp", version, about = "Variable-exponent TV denoising and fan-beam tomography")]
struct Cli {
    /// Worker threads (default: VARLP_THREADS, else all cores).
    #[arg(long, global = true, env = "VARLP_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Denoise a phantom or an input image.
    Denoise(RunArgs),
    /// Simulate fan-beam data and reconstruct.
    Tomo(RunArgs),
    /// Build an exponent map and write its intermediate stages.
    Exponent(RunArgs),
    /// Time the prox and conjugate kernels.
    Bench(RunArgs),
    /// Write a phantom image.
    Phantom(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Config file (`key = value` per line, `#` comments).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set solver.lambda=0.2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the accepted keys with defaults and exit.
    #[arg(long)]
    schema: bool,
}

impl Verb {
    fn split(&self) -> (Command, &RunArgs) {
        match self {
            Verb::Denoise(a) => (Command::Denoise, a),
            Verb::Tomo(a) => (Command::Tomo, a),
            Verb::Exponent(a) => (Command::Exponent, a),
            Verb::Bench(a) => (Command::Bench, a),
            Verb::Phantom(a) => (Command::Phantom, a),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::InvalidArgument(_)
        | Error::InvalidGrid(_)
        | Error::InvalidGeometry(_)
        | Error::SpecMismatch(_) => EXIT_CONFIG,
        Error::NonFinite(_) | Error::Numeric(_) => EXIT_NUMERIC,
        Error::Io { .. } | Error::Image { .. } | Error::UnsupportedImage(_) => EXIT_IO,
    }
}

fn run(command: Command, args: &RunArgs) -> Result<String, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(command, path)?,
        None => ExperimentConfig::defaults(command),
    };
    for assignment in &args.set {
        cfg.set(assignment)?;
    }
    execute(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let (command, args) = cli.verb.split();
    if args.schema {
        print!("{}", schema_doc(command));
        return ExitCode::SUCCESS;
    }
    match run(command, args) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
