use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kinkscan::estimator::FMode;
use kinkscan_cli::commands::{self, EstimateArgs, McKind, Outcome, EXIT_ERROR};
use kinkscan_cli::config::parse_bandwidth;
use kinkscan_cli::CliResult;

#[derive(Parser)]
#[command(
    name = "kinkscan",
    version,
    about = "Kink detection and localisation in random-design regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the kernel coefficients, verify its conditions, tabulate it.
    Kernel {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        order: i64,
        #[arg(long)]
        verify: bool,
        /// Emit x, K, K1, K2, K3 as CSV at this step over [-1, 1].
        #[arg(long, value_name = "STEP")]
        table: Option<f64>,
    },
    /// Generate a dataset from a run config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides run.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Detect and localise kinks in a dataset CSV.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        /// Detection bandwidth: auto, a value, or scaled(c).
        #[arg(long, value_parser = bandwidth)]
        bandwidth: Option<kinkscan::experiments::BandwidthRule>,
        /// Zero-crossing bandwidth: auto, a value, or scaled(c).
        #[arg(long, value_parser = bandwidth)]
        bandwidth_zero: Option<kinkscan::experiments::BandwidthRule>,
        #[arg(long, value_enum)]
        f_mode: Option<FModeArg>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run config supplying estimator settings and, for oracle F, the scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the detection profile as an SVG line plot.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Monte Carlo studies.
    Mc {
        #[arg(value_enum)]
        study: Study,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides run.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FModeArg {
    Ranks,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Rate,
    Null,
    Clt,
}

fn bandwidth(s: &str) -> Result<kinkscan::experiments::BandwidthRule, String> {
    parse_bandwidth(s)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("KINKSCAN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("KINKSCAN_THREADS must be a nonnegative integer, got '{raw}'"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn run(command: Command) -> CliResult<Outcome> {
    match command {
        Command::Kernel {
            order,
            verify,
            table,
        } => commands::kernel(order, verify, table),
        Command::Simulate { config, out, seed } => commands::simulate(&config, &out, seed),
        Command::Estimate {
            data,
            bandwidth,
            bandwidth_zero,
            f_mode,
            out,
            config,
            svg,
        } => commands::estimate_cmd(&EstimateArgs {
            data,
            bandwidth,
            bandwidth_zero,
            f_mode: f_mode.map(|m| match m {
                FModeArg::Ranks => FMode::Ranks,
                FModeArg::Oracle => FMode::Oracle,
            }),
            out,
            config,
            svg,
        }),
        Command::Mc {
            study,
            config,
            out_dir,
            seed,
        } => {
            let kind = match study {
                Study::Rate => McKind::Rate,
                Study::Null => McKind::Null,
                Study::Clt => McKind::Clt,
            };
            commands::mc(kind, &config, &out_dir, seed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR as u8);
    }
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
