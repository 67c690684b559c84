//! `redpoly`: build, measure and verify reduced spherical polygons.
//!
//! Exit codes: 0 pass, 1 failed check, 2 usage error, 3 input error.

mod commands;
mod thickness;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "redpoly",
    version,
    about = "Reduced spherical polygons: construction, metrics and claim checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct FormatArg {
    /// Output format for reports and tables.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the regular n-gon of a given thickness and print its metrics.
    Regular {
        /// Odd vertex count, at least 3.
        #[arg(long)]
        n: usize,
        /// Radians, or a fraction of pi such as pi/4 or 3*pi/8.
        #[arg(long, allow_hyphen_values = true)]
        thickness: String,
        /// Write the polygon document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a polygon document.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Run the reducedness check and every polygon-level claim.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Tolerance on the spread of vertex-to-opposite-side distances.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Covering radii of the regular triangle against the printed table.
    Table1 {
        #[command(flatten)]
        format: FormatArg,
    },
    /// Finite-difference checks of the scalar lemmas and regular perimeters.
    Lemmas {
        /// Interior grid points, at least 100.
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Comma-separated values of lambda = tan(thickness).
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 1.0, 2.0, 5.0])]
        lambdas: Vec<f64>,
        /// Write plot-ready CSV series into this directory.
        #[arg(long)]
        series_dir: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Sample reduced polygons and run the full suite on them.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        thickness: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full report here (JSON, or CSV with --format csv).
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArg,
    },
    /// Full suite over regular polygons, sampled polygons and optional files.
    Suite {
        /// Additional polygon documents.
        #[arg(long = "in")]
        inputs: Vec<PathBuf>,
        /// Samples per sampled configuration.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
