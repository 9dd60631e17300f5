mod analyze;
mod config;
mod error;
mod manifest;
mod report;
mod simulate;

use clap::{Args, Parser, Subcommand};
use config::{FsSection, IsingSection, RunConfig, WalkSection};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "prewet", version, about = "Prewetting interfaces, effective walks and Ferrari–Spohn references")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample Ising interfaces under the field λ/N with mixed boundary.
    SimulateIsing(IsingArgs),
    /// Draw exact area-tilted bridges of the effective walk.
    SimulateWalk(WalkArgs),
    /// Tabulate the stationary density and transition kernel.
    FsReference(FsArgs),
    /// Compare stored runs with the reference and write report.json.
    Analyze(AnalyzeArgs),
    /// Verify a run's digests and print its report.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML config or a run manifest; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IsingArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Sweeps per replica after burn-in.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    /// Retained configurations per replica.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct WalkArgs {
    /// Inverse temperature fixing m* in the tilt.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Bridges per replica.
    #[arg(long)]
    samples: Option<usize>,
    /// Step-law CSV with columns theta,zeta,weight.
    #[arg(long)]
    law: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct FsArgs {
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    chi: Option<f64>,
    /// Number of density grid intervals.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Run directories to analyze.
    inputs: Vec<PathBuf>,
    /// Overrides the χ estimated from each run.
    #[arg(long)]
    chi: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Analysis directory.
    #[arg(long)]
    out: PathBuf,
}

impl Common {
    fn layer(&self, cfg: RunConfig) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig { seed: self.seed, replicas: self.replicas, out: self.out.clone(), ..cfg };
        Ok(file.overlay(flags))
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PREWET_THREADS") {
        let n: usize =
            v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                CliError::validation("PREWET_THREADS", format!("expected a positive integer, got `{v}`"))
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::runtime("threads", e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::SimulateIsing(a) => {
            let s = IsingSection {
                beta: a.beta,
                lambda: a.lambda,
                n: a.n,
                sweeps: a.sweeps,
                burnin: a.burnin,
                samples: a.samples,
                thin: a.thin,
            };
            simulate::ising(a.common.layer(RunConfig { ising: Some(s), ..Default::default() })?)
        }
        Command::SimulateWalk(a) => {
            let s = WalkSection { beta: a.beta, lambda: a.lambda, n: a.n, samples: a.samples, law: a.law };
            simulate::walk(a.common.layer(RunConfig { walk: Some(s), ..Default::default() })?)
        }
        Command::FsReference(a) => {
            let s = FsSection { beta: a.beta, lambda: a.lambda, chi: a.chi, n: a.n, ..Default::default() };
            simulate::fs_reference(a.common.layer(RunConfig { fs: Some(s), ..Default::default() })?)
        }
        Command::Analyze(a) => {
            let s = config::AnalyzeSection {
                inputs: (!a.inputs.is_empty()).then_some(a.inputs),
                chi: a.chi,
                ..Default::default()
            };
            analyze::run(a.common.layer(RunConfig { analyze: Some(s), ..Default::default() })?)
        }
        Command::Report(a) => report::run(&a.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::validation("arguments", e.kind().to_string());
            eprint!("{e}");
            eprintln!("{}", err.to_json());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
