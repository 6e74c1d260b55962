use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use twinchi2_cli::config::Pairs;
use twinchi2_cli::presets::{preset_pairs, PRESETS};
use twinchi2_cli::{run, CliError, ExperimentConfig, Route, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RouteArg {
    Analytic,
    Sde,
    CavitySpectrum,
    Preset,
}

/// Tripartite entanglement in twin χ(2) systems: closed forms, positive-P
/// ensembles and cavity spectra, written as CSV.
#[derive(Debug, Parser)]
#[command(name = "twinchi2", version)]
struct Args {
    route: RouteArg,
    /// Preset name (fig1 .. fig8) for the preset route.
    name: Option<String>,
    /// key=value config file, or a previous output CSV.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory count for stochastic runs.
    #[arg(long)]
    traj: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for stochastic runs. Does not change the output.
    #[arg(long)]
    workers: Option<usize>,
    /// List the presets and exit.
    #[arg(long)]
    list: bool,
}

fn resolve(args: &Args) -> Result<ExperimentConfig, CliError> {
    let (route, mut pairs) = match args.route {
        RouteArg::Preset => {
            let name = args
                .name
                .as_deref()
                .ok_or_else(|| CliError::Config("preset route needs a preset name".into()))?;
            if args.config.is_some() {
                return Err(CliError::Config("--config cannot be combined with a preset".into()));
            }
            preset_pairs(name)?
        }
        r => {
            if let Some(name) = &args.name {
                return Err(CliError::Config(format!("unexpected argument `{name}`")));
            }
            let route = match r {
                RouteArg::Analytic => Route::Analytic,
                RouteArg::Sde => Route::Sde,
                _ => Route::CavitySpectrum,
            };
            let pairs = match &args.config {
                Some(path) => Pairs::parse(&std::fs::read_to_string(path)?)?,
                None => Pairs::default(),
            };
            (route, pairs)
        }
    };
    if let Some(seed) = args.seed {
        pairs.overwrite("seed", &seed.to_string());
    }
    if let Some(traj) = args.traj {
        pairs.overwrite("traj", &traj.to_string());
    }
    ExperimentConfig::from_pairs(route, pairs)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for p in &PRESETS {
            println!("{:<6} {:<16} {}", p.name, p.route.name(), p.description);
        }
        return ExitCode::SUCCESS;
    }
    let result = resolve(&args).and_then(|cfg| {
        let out = run(&cfg, &RunOptions { workers: args.workers })?;
        match &args.out {
            Some(path) => std::fs::write(path, &out.csv)?,
            None => print!("{}", out.csv),
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            for line in out.verdict.lines() {
                eprintln!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("twinchi2: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
