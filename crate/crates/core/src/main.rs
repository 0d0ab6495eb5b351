use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dephase_lab::commands::{fig1_csv, rate_gue_csv, tfd_csv, with_threads, Fig1Config, RateGueConfig, TfdConfig};
use dephase_lab::rates::BoundMode;
use dephase_lab::rng::DEFAULT_SEED;
use dephase_lab::validate::{format_report, run_validation, ValidateOptions};
use dephase_lab::Error;

/// Decoherence rates of Markovian dephasing processes.
#[derive(Parser, Debug)]
#[command(name = "dephase-lab", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Master seed for all random streams
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write CSV here instead of stdout
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// GUE-averaged rate: closed forms and Monte-Carlo estimate
    RateGue {
        /// Hilbert-space dimensions
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 4, 8, 16, 32, 64])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// GUE rate versus k-body bounds and their crossover
    Fig1 {
        #[arg(long = "k", value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 60)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        n0: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, value_enum, default_value_t = Mode::Paper)]
        mode: Mode,
    },
    /// Thermofield-double purity decay and rates
    Tfd {
        #[arg(long, default_value_t = 5)]
        n_qubits: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 1.0])]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Largest γt of the time grid
        #[arg(long, default_value_t = 10.0)]
        gamma_t_max: f64,
        /// Number of evenly spaced γt points, starting at 0
        #[arg(long, default_value_t = 51)]
        gamma_t_points: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Closed-form rates only, no sampling (any n up to 60)
        #[arg(long)]
        formula_only: bool,
    },
    /// Run the built-in numerical checks
    Validate {
        /// Reduced sample sizes
        #[arg(long)]
        quick: bool,
        /// Multiplier applied to every tolerance
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Paper,
    ExactBinomial,
}

impl From<Mode> for BoundMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Paper => BoundMode::Approx,
            Mode::ExactBinomial => BoundMode::ExactBinomial,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::DimensionMismatch { .. } => 2,
        _ => 3,
    }
}

fn linspace(max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..points).map(|i| max * i as f64 / (points - 1) as f64).collect(),
    }
}

fn emit(text: &str, output: &Option<PathBuf>) -> std::io::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn run(cli: Cli) -> Result<(String, bool), Error> {
    let Common { seed, threads, .. } = cli.common;
    match cli.command {
        Command::RateGue { dims, gamma, samples } => {
            let cfg = RateGueConfig { dims, gamma, samples, seed };
            Ok((with_threads(threads, || rate_gue_csv(&cfg))??, true))
        }
        Command::Fig1 { ks, n_max, n0, gamma, mode } => {
            let cfg = Fig1Config { ks, n_max, n0, gamma, mode: mode.into(), seed };
            Ok((fig1_csv(&cfg)?, true))
        }
        Command::Tfd { n_qubits, betas, gamma, gamma_t_max, gamma_t_points, samples, formula_only } => {
            if !(gamma_t_max >= 0.0 && gamma_t_max.is_finite()) {
                return Err(Error::Config("--gamma-t-max must be finite and non-negative".into()));
            }
            let cfg = TfdConfig {
                n_qubits,
                betas,
                gamma,
                gamma_t: linspace(gamma_t_max, gamma_t_points),
                samples,
                seed,
                formula_only,
            };
            Ok((with_threads(threads, || tfd_csv(&cfg))??, true))
        }
        Command::Validate { quick, tolerance_scale } => {
            if !(tolerance_scale >= 0.0 && tolerance_scale.is_finite()) {
                return Err(Error::Config("--tolerance-scale must be finite and non-negative".into()));
            }
            let opts = ValidateOptions { seed, quick, tolerance_scale };
            let outcomes = with_threads(threads, || run_validation(&opts))??;
            let ok = outcomes.iter().all(|o| o.passed);
            Ok((format_report(&outcomes), ok))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.common.output.clone();
    match run(cli) {
        Ok((text, ok)) => {
            if let Err(e) = emit(&text, &output) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
