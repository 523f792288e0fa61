use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod commands;
mod table;

use table::{Format, Table};

#[derive(Debug, Parser)]
#[command(name = "gauss-renyi", version, about = "Invariant densities and digit laws of the random Gauss-Renyi map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Perturbation series of the invariant density on a uniform grid.
    Density(DensityArgs),
    /// Limiting digit law from the series next to the Gauss-Kuzmin law.
    Digits(DigitsArgs),
    /// Order-of-accuracy study against the eigensolve reference.
    Convergence(ConvergenceArgs),
    /// Lasota-Yorke constants and admissible eps range per derivative index.
    Bounds(BoundsArgs),
    /// Monte Carlo frequencies of the n-th random continued-fraction digit.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct Discretization {
    /// Chebyshev degree of the collocation grid.
    #[arg(long, default_value_t = gauss_renyi::funcspace::DEFAULT_DEGREE)]
    pub degree: usize,
    /// Number of explicitly summed branches.
    #[arg(long, default_value_t = 256)]
    pub a_max: u64,
    /// Endpoint Taylor order of the branch tail.
    #[arg(long, default_value_t = 3)]
    pub taylor_order: u32,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = gauss_renyi::perturbation::DEFAULT_ORDER)]
    pub order: usize,
    /// Number of equally spaced points on [0,1].
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    #[command(flatten)]
    pub disc: Discretization,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DigitsArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = gauss_renyi::perturbation::DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long, default_value_t = gauss_renyi::digits::DEFAULT_N_MAX)]
    pub n_max: usize,
    #[command(flatten)]
    pub disc: Discretization,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    /// Comma-separated eps values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.01,0.02,0.04")]
    pub eps_grid: Vec<f64>,
    /// Largest series order; orders 1..=order are studied.
    #[arg(long, default_value_t = gauss_renyi::perturbation::DEFAULT_ORDER)]
    pub order: usize,
    #[command(flatten)]
    pub disc: Discretization,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Largest derivative index i.
    #[arg(long, default_value_t = 8)]
    pub max_index: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Index n of the recorded digit d_n.
    #[arg(long, default_value_t = 20)]
    pub n_index: usize,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Library(gauss_renyi::Error),
    Io(io::Error),
}

impl From<gauss_renyi::Error> for CliError {
    fn from(e: gauss_renyi::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid arguments: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn emit(table: &Table, output: &Output) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(output.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(output.format, &mut lock)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (table, output) = match &cli.command {
        Command::Density(a) => (commands::density(a)?, &a.output),
        Command::Digits(a) => (commands::digits(a)?, &a.output),
        Command::Convergence(a) => (commands::convergence(a)?, &a.output),
        Command::Bounds(a) => (commands::bounds(a)?, &a.output),
        Command::Simulate(a) => (commands::simulate(a)?, &a.output),
    };
    log::info!("computed in {:.2?}", start.elapsed());
    emit(&table, output)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
