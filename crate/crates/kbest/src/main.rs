//! `kbest` — throughput tables and validation for k-th best SU selection.
//!
//! Exit codes: 0 success, 1 validation failure, 2 invalid arguments.

use clap::{Args, Parser, Subcommand, ValueEnum};
use kbest::sweep::{
    figure_spec, run_sweep, to_csv, to_json, Figure, FigureOverrides, SweepSpec, SweepTable,
    SweepVariable,
};
use kbest::throughput::Method;
use kbest::validate::{render_report, run as run_validation, Level};
use kbest::ChannelParams;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kbest",
    about = "Average/effective throughput of k-th best secondary-user selection in underlay CR",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Asymptotic,
    Quadrature,
    Montecarlo,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Asymptotic => Method::Asymptotic,
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::Montecarlo => Method::Montecarlo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariableArg {
    N,
    M,
    Q,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args)]
struct OutputOpts {
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Write the table to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CommonOpts {
    /// Monte Carlo trial count
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Master seed for all randomized methods
    #[arg(long, env = "KBEST_SEED", default_value_t = 0)]
    seed: u64,
    /// Evaluation methods
    #[arg(long, value_delimiter = ',', value_enum)]
    methods: Option<Vec<MethodArg>>,
    /// Worker thread count (0 = all cores)
    #[arg(long, env = "KBEST_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the four figure sweeps as a data table
    Figure {
        /// Figure number (1: avg vs N; 2: avg vs M; 3: eff vs N; 4: eff vs Q)
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        number: u8,
        /// Override the swept grid (comma-separated, strictly increasing)
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Override the selection ranks
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u32>>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run a custom parameter sweep
    Sweep {
        /// Swept variable: n (users), m (antennas), q (interference cap, dB)
        #[arg(long, value_enum)]
        variable: VariableArg,
        /// Grid of swept values (strictly increasing)
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Fixed user count N (when not swept)
        #[arg(long, default_value_t = 20)]
        n: u32,
        /// Selection ranks k (1 = best)
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<u32>,
        /// Receive antennas M (when not swept)
        #[arg(long, default_value_t = 1)]
        m: u32,
        /// Fading rate of the SU -> PR link
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        /// Fading rate of the SU -> SR link
        #[arg(long, default_value_t = 1.0 / 3.0)]
        eta: f64,
        /// Noise-to-interference-cap ratio rho = N0/Q (linear)
        #[arg(long, conflicts_with_all = ["q_db", "n0_db"])]
        rho: Option<f64>,
        /// Interference cap Q in dB (alternative to --rho)
        #[arg(long, requires = "n0_db")]
        q_db: Option<f64>,
        /// Noise level N0 in dB (with --q-db)
        #[arg(long)]
        n0_db: Option<f64>,
        /// Delay exponents A = theta*T*B/ln2 (0 = average throughput)
        #[arg(long, value_delimiter = ',', default_value = "0")]
        a: Vec<f64>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the built-in verification suite
    Validate {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        #[arg(long, env = "KBEST_SEED", default_value_t = 0)]
        seed: u64,
        /// Worker thread count (0 = all cores)
        #[arg(long, env = "KBEST_THREADS", default_value_t = 0)]
        threads: usize,
    },
}

fn init_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn emit(table: &SweepTable, output: &OutputOpts) -> std::io::Result<()> {
    let rendered = match output.format {
        FormatArg::Csv => to_csv(table),
        FormatArg::Json => to_json(table),
    };
    match &output.out {
        Some(path) => std::fs::write(path, rendered),
        None => std::io::stdout().write_all(rendered.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Figure {
            number,
            values,
            k,
            common,
            output,
        } => {
            init_threads(common.threads);
            let fig = Figure::from_index(number).expect("range-checked by clap");
            let ov = FigureOverrides {
                values,
                trials: Some(common.trials),
                seed: Some(common.seed),
                methods: common
                    .methods
                    .map(|ms| ms.into_iter().map(Method::from).collect()),
                ranks: k,
            };
            let table = match run_sweep(&figure_spec(fig, &ov)) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = emit(&table, &output) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Command::Sweep {
            variable,
            values,
            n,
            k,
            m,
            lambda,
            eta,
            rho,
            q_db,
            n0_db,
            a,
            common,
            output,
        } => {
            init_threads(common.threads);
            let n0_db = n0_db.unwrap_or(0.0);
            let rho = match (rho, q_db) {
                (Some(r), _) => r,
                (None, Some(q)) => 10f64.powf(n0_db / 10.0) / 10f64.powf(q / 10.0),
                (None, None) => 1.0,
            };
            let channel = match ChannelParams::new(lambda, eta, rho, m) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let spec = SweepSpec {
                variable: match variable {
                    VariableArg::N => SweepVariable::NUsers,
                    VariableArg::M => SweepVariable::MAntennas,
                    VariableArg::Q => SweepVariable::QInterferenceDb,
                },
                values,
                channel,
                n_users: n,
                ranks: k,
                a_exponents: a,
                methods: common
                    .methods
                    .map(|ms| ms.into_iter().map(Method::from).collect())
                    .unwrap_or_else(|| vec![Method::Asymptotic, Method::Montecarlo]),
                trials: common.trials,
                seed: common.seed,
                n0_db,
            };
            let table = match run_sweep(&spec) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = emit(&table, &output) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Command::Validate {
            level,
            seed,
            threads,
        } => {
            init_threads(threads);
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let results = run_validation(level, seed);
            print!("{}", render_report(&results, seed));
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
