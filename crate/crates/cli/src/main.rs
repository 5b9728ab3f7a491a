//! Command-line estimation of the Youden index and optimal cutoff
//! under a density ratio model.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use youden_drm::sim::Method;
use youden_drm_cli::commands::{run_estimate, run_simulate, EstimateArgs, SimulateArgs};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliMethod {
    Drm,
    Ecdf,
}

impl From<CliMethod> for Method {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Drm => Method::Drm,
            CliMethod::Ecdf => Method::Ecdf,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Youden index and optimal biomarker cutoff estimation under density
/// ratio models, with LLOD support.
#[derive(Parser)]
#[command(name = "youden-drm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Estimate (J, c) with confidence intervals from a CSV dataset
    Estimate {
        /// CSV file with `group` (0/1) and `value` columns, optional
        /// `biomarker` column
        #[arg(long)]
        input: PathBuf,

        /// Basis name: linear, loglog, or xlogx
        #[arg(long)]
        basis: String,

        /// Lower limit of detection; omit or pass -inf for none
        #[arg(long, default_value = "-inf", allow_hyphen_values = true)]
        llod: f64,

        /// Confidence level
        #[arg(long, default_value_t = 0.95)]
        level: f64,

        /// Methods to run
        #[arg(long, value_delimiter = ',', default_values = ["drm", "ecdf"])]
        methods: Vec<CliMethod>,

        /// Bootstrap replicates for ECDF intervals (0 disables)
        #[arg(long = "bootstrap-B", default_value_t = 1000)]
        bootstrap_b: usize,

        /// Seed for bootstrap resampling
        #[arg(long, default_value_t = youden_drm::sim::DEFAULT_SEED)]
        seed: u64,

        /// Output format on stdout
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },

    /// Run a Monte Carlo scenario from a JSON config or builtin name
    Simulate {
        /// Path to a scenario JSON, or a builtin like
        /// gamma_J0.4_200_200_nollod
        #[arg(long)]
        scenario: String,

        /// Worker threads (default: all cores); results are identical
        /// for any value
        #[arg(long)]
        workers: Option<usize>,

        /// Output directory for metrics.csv and summary.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Commands::Estimate {
            input,
            basis,
            llod,
            level,
            methods,
            bootstrap_b,
            seed,
            format,
        } => {
            let args = EstimateArgs {
                input,
                basis,
                llod,
                level,
                methods: methods.into_iter().map(Method::from).collect(),
                bootstrap_b,
                seed,
            };
            match run_estimate(&args) {
                Ok(report) => {
                    match format {
                        Format::Json => println!("{}", report.to_json()),
                        Format::Csv => print!("{}", report.to_csv()),
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code as u8)
                }
            }
        }
        Commands::Simulate {
            scenario,
            workers,
            out,
        } => {
            let args = SimulateArgs {
                scenario,
                workers,
                out,
            };
            match run_simulate(&args) {
                Ok(metrics) => {
                    eprintln!(
                        "wrote {} and {} ({} replicates, {} failures)",
                        args.out.join("metrics.csv").display(),
                        args.out.join("summary.json").display(),
                        metrics.reps,
                        metrics.failures
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code as u8)
                }
            }
        }
    }
}
