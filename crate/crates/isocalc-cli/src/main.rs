//! Command-line front end for the constant family: compute constants,
//! verify identities, tabulate derivatives and residuals, probe grid
//! convergence. Tables render as text, CSV, or JSON with identical
//! numeric strings in every format.

mod cache;
mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::GridFn;
use crate::config::{FileConfig, Settings};
use crate::error::CliError;
use crate::output::{Format, Report};

#[derive(Parser)]
#[command(
    name = "isocalc",
    version,
    about = "Euler-family constants from exact and approximate discrete derivatives",
    disable_help_subcommand = true
)]
struct Cli {
    /// Configuration file with key = value lines: digits, max_terms,
    /// cache, threads
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Significant digits to print; defaults to 30 for constants and 12
    /// for tables
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    digits: Option<u32>,

    /// Output encoding
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for block-parallel summation
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    /// Omit the timestamp and wall-time lines so output bytes are
    /// reproducible
    #[arg(long, global = true)]
    no_timestamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute gamma_k and gamma'_k, optionally lambda_1 and the
    /// e-threshold
    Constants {
        /// Family indices, comma separated
        #[arg(long, value_delimiter = ',', value_name = "K,...",
              value_parser = clap::value_parser!(u32).range(1..))]
        k: Vec<u32>,

        /// Include lambda_1
        #[arg(long)]
        lambda1: bool,

        /// Include the first t with e - (1 + 1/t)^t below this tolerance
        #[arg(long, value_name = "EPSILON")]
        e_threshold: Option<String>,
    },

    /// Run the identity suite; exits 1 if any identity fails
    Verify,

    /// Tabulate exact and approximate unit-step derivatives of ln^k
    Derivatives {
        /// Power of the logarithm
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,

        /// First tabulated point
        #[arg(long)]
        x_start: u64,

        /// Last tabulated point, inclusive
        #[arg(long)]
        x_end: u64,
    },

    /// Difference quotients of ln, ln2, or ln3 across grid refinements
    Grid {
        /// Function to probe
        #[arg(long, value_enum)]
        function: GridFn,

        /// Evaluation point
        #[arg(long)]
        x: u64,

        /// Grid base b; the step at gap m is b^-m
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        base: u32,

        /// Gaps m to probe, comma separated
        #[arg(long, value_delimiter = ',', value_name = "M,...")]
        m_list: Vec<u32>,
    },

    /// Partial sums of approximate forward derivatives against the
    /// telescoped endpoint
    Residuals {
        /// Power of the logarithm
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,

        /// Sweep length
        #[arg(long)]
        n_max: u64,
    },
}

fn execute(cli: Cli) -> Result<(Report, Format, i32), CliError> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(
        file,
        cli.digits,
        cli.threads.map(|t| t as usize),
        cli.format,
        cli.no_timestamp,
    );
    if let Some(n) = settings.threads {
        // Sizing can only happen before first use; a second build attempt
        // in the same process is a no-op.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let (report, code) = match cli.command {
        Command::Constants {
            k,
            lambda1,
            e_threshold,
        } => commands::cmd_constants(&k, lambda1, e_threshold.as_deref(), &settings)?,
        Command::Verify => commands::cmd_verify(&settings)?,
        Command::Derivatives { k, x_start, x_end } => {
            commands::cmd_derivatives(k, x_start, x_end, &settings)?
        }
        Command::Grid {
            function,
            x,
            base,
            m_list,
        } => commands::cmd_grid(function, x, base, &m_list, &settings)?,
        Command::Residuals { k, n_max } => commands::cmd_residuals(k, n_max, &settings)?,
    };
    Ok((report, settings.format, code))
}

fn main() {
    let cli = Cli::parse();
    let code = match execute(cli) {
        Ok((report, format, code)) => {
            print!("{}", report.render(format));
            code
        }
        Err(err) => {
            eprintln!("isocalc: {err}");
            err.exit_code()
        }
    };
    std::process::exit(code);
}
