use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vri::config::{parse_grid, Kind, Overrides, RunConfig};
use vri::ensembles::SliceGridSpec;
use vri::run::{replay, run_with};

/// Trajectory fates near a valley-ridge inflection point.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients, critical points, VRI location and saddle spectrum (JSON).
    PesInfo(Common),
    /// Line ensemble at one energy: fates, ensemble, summary.
    LineRun(Common),
    /// Recrossing fraction over an (H0, x_i) grid of line ensembles.
    SweepSurface(Common),
    /// Fate map on the phase-space section at x = 0.
    FateMap(Common),
    /// Fate maps over x_i with slice areas and a quadratic fit.
    SweepSlice(Common),
    /// Line ensemble with sampled paths and limiting trajectories.
    Traces(Common),
    /// Momentum and exit-angle statistics of recrossing trajectories.
    Stats(Common),
    /// Re-executes the run described by a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    h0: Option<f64>,
    /// VRI location x_i.
    #[arg(long)]
    xi: Option<f64>,
    /// Line-ensemble trajectories per unit width.
    #[arg(long)]
    density: Option<f64>,
    /// Section grid as NY,NPY.
    #[arg(long, value_parser = grid_arg)]
    grid: Option<SliceGridSpec>,
    #[arg(long)]
    tmax: Option<f64>,
    /// Well capture radius.
    #[arg(long)]
    radius: Option<f64>,
}

fn grid_arg(s: &str) -> Result<SliceGridSpec, String> {
    parse_grid(s).map_err(|e| e.to_string())
}

fn resolve(kind: Kind, c: Common) -> vri::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load_for(path, kind)?,
        None => {
            let mut cfg = RunConfig::default();
            cfg.select(kind, false)?;
            cfg
        }
    };
    cfg.apply(&Overrides {
        out: c.out,
        workers: c.workers,
        h0: c.h0,
        xi: c.xi,
        density: c.density,
        grid: c.grid,
        tmax: c.tmax,
        radius: c.radius,
    });
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut progress = |line: &str| eprintln!("{line}");
    let outcome = match cli.command {
        Command::Replay { manifest, out } => replay(&manifest, out.as_deref(), &mut progress),
        Command::PesInfo(c) => resolve(Kind::PesInfo, c).and_then(|cfg| run_with(&cfg, &mut progress)),
        Command::LineRun(c) => resolve(Kind::LineRun, c).and_then(|cfg| run_with(&cfg, &mut progress)),
        Command::SweepSurface(c) => resolve(Kind::SweepSurface, c).and_then(|cfg| run_with(&cfg, &mut progress)),
        Command::FateMap(c) => resolve(Kind::FateMap, c).and_then(|cfg| run_with(&cfg, &mut progress)),
        Command::SweepSlice(c) => resolve(Kind::SweepSlice, c).and_then(|cfg| run_with(&cfg, &mut progress)),
        Command::Traces(c) => resolve(Kind::Traces, c).and_then(|cfg| run_with(&cfg, &mut progress)),
        Command::Stats(c) => resolve(Kind::Stats, c).and_then(|cfg| run_with(&cfg, &mut progress)),
    };
    match outcome {
        Ok(o) => {
            if let Some(text) = o.stdout {
                println!("{text}");
            }
            for w in &o.manifest.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {} files to {}", o.manifest.files.len() + 1, o.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
