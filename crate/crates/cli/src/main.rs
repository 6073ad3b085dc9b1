//! `peanoseg`: synthesize noisy images, segment them, and score the results.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use peanoseg::Method;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "peanoseg",
    version,
    about = "Hidden Markov chain image segmentation along a Peano scan"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Add Gaussian noise to a label image.
    Synth(SynthArgs),
    /// Segment an observed image without supervision.
    Segment(SegmentArgs),
    /// Print the permutation-invariant error rate between two label images.
    Eval(EvalArgs),
    /// Repeat synth, segment and eval over methods and seeds.
    Bench(BenchArgs),
    /// Print the scan ranks of a 2^order grid.
    Scan(ScanArgs),
    /// Write one of the built-in synthetic truth images.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Class means, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "0,1"
    )]
    means: Vec<f64>,
    /// Class variances, comma separated.
    #[arg(long = "vars", value_delimiter = ',', default_value = "1,1")]
    variances: Vec<f64>,
}

#[derive(Debug, Args)]
struct SemArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of SEM iterations.
    #[arg(long = "sem-iters", default_value_t = 100)]
    sem_iters: usize,
    /// Stop when no parameter moves by more than this.
    #[arg(long = "sem-tol", default_value_t = 1e-4)]
    sem_tol: f64,
    /// Sample from the plain-scan posterior during estimation.
    #[arg(long)]
    approx: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Truth label image (PGM).
    truth: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output PGM; parameters are written next to it as `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// Observed image (PGM).
    image: PathBuf,
    #[arg(long, default_value = "hmc-cps")]
    method: Method,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[command(flatten)]
    sem: SemArgs,
    /// Center-crop to the largest power-of-two square.
    #[arg(long)]
    crop: bool,
    /// Output label image (PGM).
    #[arg(long)]
    out: PathBuf,
    /// Append a report row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    truth: PathBuf,
    predicted: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Truth label image (PGM).
    truth: PathBuf,
    #[arg(
        long = "method",
        value_delimiter = ',',
        default_value = "hmc-ps,hmc-cps,hemc-cps"
    )]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long = "sem-iters", default_value_t = 100)]
    sem_iters: usize,
    #[arg(long = "sem-tol", default_value_t = 1e-4)]
    sem_tol: f64,
    #[arg(long)]
    approx: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    order: u32,
    /// Also list the off-scan neighbors of every rank.
    #[arg(long)]
    context: bool,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// One of: stripes, squares, blobs.
    name: String,
    #[arg(long, default_value_t = 7)]
    order: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("peanoseg: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => {
            commands::synth(&a.truth, &a.noise.means, &a.noise.variances, a.seed, &a.out)
        }
        Command::Segment(a) => commands::segment(&commands::SegmentJob {
            image: a.image,
            method: a.method,
            classes: a.classes,
            config: sem_config(a.sem.seed, a.sem.sem_iters, a.sem.sem_tol, a.sem.approx),
            crop: a.crop,
            out: a.out,
            csv: a.csv,
        }),
        Command::Eval(a) => {
            let e = commands::eval(&a.truth, &a.predicted)?;
            println!("{e:.4}");
            Ok(())
        }
        Command::Bench(a) => commands::bench(&commands::BenchJob {
            truth: a.truth,
            methods: a.methods,
            seeds: a.seeds,
            means: a.noise.means,
            variances: a.noise.variances,
            config: sem_config(0, a.sem_iters, a.sem_tol, a.approx),
            csv: a.csv,
        }),
        Command::Scan(a) => commands::scan(a.order, a.context),
        Command::Generate(a) => commands::generate(&a.name, a.order, a.seed, &a.out),
    }
}

fn sem_config(seed: u64, max_iters: usize, tol: f64, approx: bool) -> peanoseg::SemConfig {
    peanoseg::SemConfig {
        max_iters,
        tol,
        seed,
        approx,
        ..Default::default()
    }
}
