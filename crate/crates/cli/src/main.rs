//! `ibnls`: reproducible experiments for the radial inhomogeneous biharmonic
//! Schrödinger equation.
//!
//! Exit codes: 0 success (including a flagged blow-up), 2 malformed input,
//! 3 hypothesis violation, 4 numerical failure.

mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Experiment, InequalityConfig, InequalityTag, RegimesConfig, SweepGrid};
use ibnls_core::params::{Num, Sign};
use ibnls_core::{Error, TestFamily};
use manifest::{write_outputs, Manifest};

#[derive(Parser)]
#[command(name = "ibnls", version, about = "Radial inhomogeneous biharmonic NLS laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check (N, b, q, eps) against every well-posedness hypothesis.
    Regimes(RegimesArgs),
    /// Sweep an inequality ratio over test functions.
    Inequality(InequalityArgs),
    /// Split-step evolution from a JSON config.
    Simulate(FileArgs),
    /// Picard iteration of the Duhamel map, checked against split-step.
    Picard(FileArgs),
    /// Empirical Strichartz ratios of the free flow.
    Strichartz(FileArgs),
    /// Evolution followed by the scattering Cauchy check.
    Scatter(FileArgs),
    /// Re-run the experiment recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Args)]
struct Output {
    /// Directory for the manifest and result files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegimesArgs {
    #[arg(long = "N")]
    dim: u32,
    #[arg(long)]
    b: Num,
    #[arg(long)]
    q: Num,
    /// +1 defocusing, -1 focusing.
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    eps: i8,
    /// Initial mass below the ground-state threshold (mass-critical case).
    #[arg(long)]
    small_mass: bool,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct InequalityArgs {
    tag: InequalityTag,
    #[arg(long = "N")]
    dim: u32,
    #[arg(long)]
    b: Option<Num>,
    #[arg(long)]
    q: Option<Num>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "R", default_value_t = SweepGrid::default().radius)]
    radius: f64,
    #[arg(long = "M", default_value_t = SweepGrid::default().points)]
    points: usize,
    /// JSON file with a list of test families.
    #[arg(long)]
    families: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FileArgs {
    /// JSON configuration document.
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RerunArgs {
    manifest: PathBuf,
    #[command(flatten)]
    output: Output,
}

fn exit_code(error: &Error) -> u8 {
    if error.is_hypothesis() {
        3
    } else if error.is_numerical() {
        4
    } else {
        2
    }
}

fn read_config(command: &str, path: &Path) -> Result<Experiment, Error> {
    Experiment::from_document(command, &std::fs::read_to_string(path)?)
}

fn build(command: Command) -> Result<(Experiment, Option<PathBuf>, Option<PathBuf>, bool), Error> {
    let parent = |p: &Path| p.parent().map(Path::to_path_buf);
    Ok(match command {
        Command::Regimes(a) => {
            let eps = Sign::try_from(a.eps)?;
            let config = RegimesConfig { dim: a.dim, b: a.b, q: a.q, eps, small_mass: a.small_mass };
            (Experiment::Regimes(config), None, a.output.out, a.json)
        }
        Command::Inequality(a) => {
            let families = match &a.families {
                Some(path) => Some(serde_json::from_str::<Vec<TestFamily>>(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            let config = InequalityConfig {
                tag: a.tag,
                dim: a.dim,
                b: a.b,
                q: a.q,
                s: a.s,
                rho: a.rho,
                grid: SweepGrid { radius: a.radius, points: a.points },
                families,
            };
            (Experiment::Inequality(config), None, a.output.out, true)
        }
        Command::Simulate(a) => (read_config("simulate", &a.config)?, parent(&a.config), a.output.out, true),
        Command::Picard(a) => (read_config("picard", &a.config)?, parent(&a.config), a.output.out, true),
        Command::Strichartz(a) => (read_config("strichartz", &a.config)?, parent(&a.config), a.output.out, true),
        Command::Scatter(a) => (read_config("scatter", &a.config)?, parent(&a.config), a.output.out, true),
        Command::Rerun(a) => {
            let manifest = Manifest::read(&a.manifest)?;
            (manifest.experiment()?, parent(&a.manifest), a.output.out, true)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build(cli.command).and_then(|(experiment, base, out, json)| {
        let outcome = commands::run(&experiment, base.as_deref(), json)?;
        if let Some(dir) = out {
            write_outputs(&dir, &Manifest::new(&experiment)?, &outcome.files)?;
        }
        Ok(outcome.stdout)
    });
    match result {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
