mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use green_conv::Real;

use crate::config::{Overrides, RunConfig};

/// Approximate radial convolutions by sums of screened-Poisson solves.
#[derive(Parser, Debug)]
#[command(name = "green-conv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit K by a sum of Green functions; writes coefficients.csv, fit_report.txt, kernel_compare.csv.
    Fit(RunArgs),
    /// Compare K∗f with the Green-sum approximation on a periodic grid.
    Convolve {
        #[command(flatten)]
        run: RunArgs,
        /// Field file with f; a centred Gaussian bump on the configured grid if omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Reuse a coefficients.csv instead of fitting again.
        #[arg(long)]
        coefficients: Option<PathBuf>,
    },
    /// Run the invariant checks and print a pass/fail table.
    Validate,
    /// Gaussian kernel with d_j = 1 + sin(j - 1) for n = 1, 2, 3.
    ReproducePaper {
        #[arg(long, default_value = "reproduce_out")]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        num_terms: usize,
        /// Restrict to one dimension.
        #[arg(long)]
        dimension: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration; built-in defaults are used if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long)]
    num_terms: Option<usize>,
    /// Grid nodes per axis, e.g. `--grid-shape 64,64`.
    #[arg(long, value_delimiter = ',')]
    grid_shape: Option<Vec<usize>>,
    /// Box length per axis, e.g. `--box-length 40,40`.
    #[arg(long, value_delimiter = ',')]
    box_length: Option<Vec<f64>>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        base.apply(&Overrides {
            dimension: self.dimension,
            num_terms: self.num_terms,
            out: self.out.clone(),
            grid_shape: self.grid_shape.clone(),
            box_length: self.box_length.clone(),
        })
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Fit(args) => {
            let cfg = args.config()?;
            let approx = commands::cmd_fit(&cfg)?;
            println!(
                "fit: N = {}, relative residual {:.3e}, condition estimate {:.3e}, max|alpha| {:.3e}",
                approx.expansion.len(),
                approx.relative_residual().to_f64_lossy(),
                approx.condition_estimate.to_f64_lossy(),
                approx.expansion.max_abs_alpha().to_f64_lossy()
            );
            for w in &approx.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", cfg.output.display());
            Ok(true)
        }
        Command::Convolve { run, input, coefficients } => {
            let cfg = run.config()?;
            let out = commands::cmd_convolve(&cfg, input.as_deref(), coefficients.as_deref())?;
            println!(
                "convolve: L2 discrepancy {:.3e}, Young bound {}",
                out.l2_error,
                if out.young_holds { "PASS" } else { "FAIL" }
            );
            if !out.young_holds {
                eprintln!("warning: the Young bound is violated, see error_report.csv");
            }
            println!("wrote {}", cfg.output.display());
            Ok(true)
        }
        Command::Validate => Ok(commands::cmd_validate()),
        Command::ReproducePaper { out, num_terms, dimension } => {
            let dims = dimension.map_or(vec![1, 2, 3], |n| vec![n]);
            let results = commands::cmd_reproduce_paper(&out, num_terms, &dims)?;
            print!("{}", commands::summary(&results));
            println!("wrote {}", out.display());
            Ok(results.iter().all(|r| r.passed()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
