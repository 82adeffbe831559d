//! Command-line surface for `semnet`: training, evaluation, bound reports,
//! dimension diagnostics, fixtures and the sample-size experiment.
//!
//! Exit codes: 0 success, 2 parse errors, 3 validation errors, 4 bound
//! regime violations.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod format;
pub mod io;
pub mod model;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use semnet::bounds::Formula;
use semnet::geometry::DimensionMode;
use semnet::DistanceSpec;

use crate::commands::{Fixture, SrmMode};
pub use crate::error::CliError;
pub use crate::model::ModelFile;

#[derive(Debug, Parser)]
#[command(name = "semnet", version, about = "Margin-based nearest-neighbor learning in semimetric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SrmArg {
    Exact,
    Greedy2,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormulaArg {
    Slow0,
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FixtureArg {
    NoPacking,
    Equidistant,
}

fn parse_spec(text: &str) -> Result<DistanceSpec, String> {
    text.parse().map_err(|e: semnet::SpaceError| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a condensed 1-NN classifier from a labeled CSV.
    Train {
        input: PathBuf,
        /// lp:<p>, js, hausdorff:<k>:<dim>, hausdorff-median:<dim>, euclidean or precomputed.
        #[arg(long, value_parser = parse_spec)]
        distance: DistanceSpec,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, value_enum, default_value = "exact")]
        srm: SrmArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label query rows with a saved model.
    Eval { model: PathBuf, queries: PathBuf },
    /// Evaluate a generalization bound.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, value_enum)]
        formula: FormulaArg,
    },
    /// Density and doubling constants of a point set.
    Dims {
        input: PathBuf,
        #[arg(long, value_parser = parse_spec, default_value = "precomputed")]
        distance: DistanceSpec,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
    },
    /// Write a fixture distance matrix.
    Gen {
        #[arg(long, value_enum)]
        fixture: FixtureArg,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.001)]
        phi: f64,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the semimetric axioms and count triangle violations.
    Validate {
        input: PathBuf,
        #[arg(long, value_parser = parse_spec, default_value = "precomputed")]
        distance: DistanceSpec,
    },
    /// Mean true error of the consistent classifier on equidistant spaces.
    ExperimentLb {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true, default_value_t = experiment::DEFAULT_EPS)]
        eps: f64,
    },
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Train { input, distance, delta, srm, out: model } => {
            let srm = match srm {
                SrmArg::Exact => SrmMode::Exact,
                SrmArg::Greedy2 => SrmMode::Greedy2,
                SrmArg::Off => SrmMode::Off,
            };
            commands::train(&input, distance, delta, srm, &model, out, err)
        }
        Command::Eval { model, queries } => commands::eval(&model, &queries, out),
        Command::Bound { n, d, eps, delta, formula } => {
            let formula = match formula {
                FormulaArg::Slow0 => Formula::SlowConsistent,
                FormulaArg::Slow => Formula::SlowLossy,
                FormulaArg::Fast => Formula::Fast,
            };
            commands::bound(formula, n, d, eps, delta, out)
        }
        Command::Dims { input, distance, mode } => {
            let mode = match mode {
                ModeArg::Exact => DimensionMode::Exact,
                ModeArg::Greedy => DimensionMode::Greedy,
            };
            commands::dims(&input, distance, mode, out)
        }
        Command::Gen { fixture, n, phi, k, seed, out: target } => {
            let fixture = match fixture {
                FixtureArg::NoPacking => Fixture::NoPacking { n, phi },
                FixtureArg::Equidistant => Fixture::Equidistant { k, seed },
            };
            commands::gen(fixture, target.as_deref(), out)
        }
        Command::Validate { input, distance } => commands::validate(&input, distance, out),
        Command::ExperimentLb { k, n, trials, seed, eps } => commands::experiment_lb(&k, &n, trials, seed, eps, out),
    }
}

/// Runs one invocation; `args` includes the program name. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
