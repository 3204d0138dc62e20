//! Executes a [`RunConfig`]: runs the experiment on a worker pool, writes the
//! data files and finally `manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, Manifest, RunConfig};
use crate::ensembles::slice_area;
use crate::error::{Error, Result};
use crate::experiments::{
    angle_histogram, fate_map, run_line_experiment, sweep_slice_with, sweep_surface, trace_ensemble,
    FateCounts, LineRun, SweepCell,
};
use crate::integrator::Fate;
use crate::output::{self, num};
use crate::pes::{coefficient_residuals, Coefficients, CriticalPoint, Pes, PesSpec, SaddleSpectrum};

pub const MANIFEST: &str = "manifest.json";

/// Analytic summary printed by `pes-info`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PesInfo {
    pub spec: PesSpec,
    pub coefficients: Coefficients,
    pub coefficient_residuals: [f64; 3],
    pub vri: [f64; 2],
    pub vri_residuals: [f64; 2],
    pub critical_points: Vec<CriticalPoint>,
    pub saddle_spectrum: SaddleSpectrum,
    pub h0: f64,
    pub bottleneck_width: f64,
    pub slice_area: f64,
}

pub fn pes_info(pes: &Pes, h0: f64) -> Result<PesInfo> {
    let (vx, vy) = pes.locate_vri()?;
    let (det, adj) = pes.vri_residuals(vx, vy);
    Ok(PesInfo {
        spec: *pes.spec(),
        coefficients: *pes.coefficients(),
        coefficient_residuals: coefficient_residuals(pes.spec(), pes.coefficients()),
        vri: [vx, vy],
        vri_residuals: [det, adj],
        critical_points: pes.critical_points()?,
        saddle_spectrum: pes.saddle_eigenvalues(),
        h0,
        bottleneck_width: pes.bottleneck_width(h0)?,
        slice_area: slice_area(pes, h0)?,
    })
}

/// What a finished run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub out: PathBuf,
    pub manifest: Manifest,
    /// Text for standard output, if the command prints any.
    pub stdout: Option<String>,
}

#[derive(Default)]
struct Product {
    grids: serde_json::Value,
    counts: FateCounts,
    inaccessible: Option<usize>,
    warnings: Vec<String>,
    files: Vec<PathBuf>,
    stdout: Option<String>,
}

/// Runs `cfg`, reporting progress lines through `progress`.
pub fn run_with(cfg: &RunConfig, progress: &mut (dyn FnMut(&str) + Send)) -> Result<Outcome> {
    cfg.validate()?;
    let out = cfg.run.out.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let manifest_path = out.join(MANIFEST);
    match fs::remove_file(&manifest_path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(&manifest_path, e)),
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.workers)
        .build()
        .map_err(|e| Error::Validation(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let product = pool.install(|| execute(cfg, &out, progress))?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        command: cfg.experiment.kind().name().to_string(),
        config: cfg.clone(),
        grids: product.grids,
        wall_time_s,
        counts: product.counts,
        inaccessible: product.inaccessible,
        warnings: product.warnings,
        files: product
            .files
            .iter()
            .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
            .collect(),
    };
    output::write_json(&manifest_path, &manifest)?;
    Ok(Outcome {
        out,
        manifest,
        stdout: product.stdout,
    })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    run_with(cfg, &mut |_| {})
}

/// Re-executes the run recorded in a manifest, optionally into another
/// directory.
pub fn replay(manifest: &Path, out: Option<&Path>, progress: &mut (dyn FnMut(&str) + Send)) -> Result<Outcome> {
    let mut cfg = Manifest::load(manifest)?.config;
    if let Some(out) = out {
        cfg.run.out = out.to_path_buf();
    }
    run_with(&cfg, progress)
}

fn cell_warnings(cell: &SweepCell, warnings: &mut Vec<String>) {
    if let Some(err) = &cell.error {
        warnings.push(format!("H0={} xi={}: failed: {err}", num(cell.h0), num(cell.xi)));
    } else if cell.flagged {
        warnings.push(format!(
            "H0={} xi={}: timeout fraction {} exceeds limit",
            num(cell.h0),
            num(cell.xi),
            num(cell.frac_timeout)
        ));
    }
}

fn line_files(run: &LineRun, pes: &Pes, h0: f64, density: f64, out: &Path, p: &mut Product) -> Result<()> {
    p.files.push(output::write_fates(out.join("fates.csv"), &run.results)?);
    p.files.push(output::write_ensemble(out.join("ensemble.csv"), &run.initial)?);
    let sidecar = json!({
        "h0": h0,
        "density": density,
        "vri_x": pes.spec().vri_x,
        "bottleneck_width": pes.bottleneck_width(h0)?,
        "n": run.initial.len(),
        "x0": 0.0,
        "py0": 0.0,
    });
    p.files.push(output::write_json(out.join("ensemble.json"), &sidecar)?);
    p.grids = sidecar;
    p.counts = run.cell.counts;
    cell_warnings(&run.cell, &mut p.warnings);
    Ok(())
}

fn execute(cfg: &RunConfig, out: &Path, progress: &mut (dyn FnMut(&str) + Send)) -> Result<Product> {
    let mut p = Product::default();
    match cfg.experiment {
        Experiment::PesInfo(params) => {
            let pes = Pes::new(cfg.pes)?;
            let info = pes_info(&pes, params.h0)?;
            p.files.push(output::write_json(out.join("pes_info.json"), &info)?);
            p.grids = json!({ "h0": params.h0 });
            p.stdout = Some(serde_json::to_string_pretty(&info)?);
        }
        Experiment::LineRun(params) => {
            let pes = Pes::new(cfg.pes)?;
            let run = run_line_experiment(&pes, params.h0, params.density, &cfg.integrator)?;
            progress(&format!(
                "line-run: {} trajectories, recross fraction {}",
                run.cell.n,
                num(run.cell.frac_recross)
            ));
            line_files(&run, &pes, params.h0, params.density, out, &mut p)?;
        }
        Experiment::Traces(params) => {
            let pes = Pes::new(cfg.pes)?;
            let icfg = crate::IntegratorConfig {
                sample_interval: params.sample_interval,
                ..cfg.integrator
            };
            let (run, traces) = trace_ensemble(&pes, params.h0, params.density, &icfg)?;
            line_files(&run, &pes, params.h0, params.density, out, &mut p)?;
            p.files.push(output::write_paths(out.join("paths.csv"), &run.results, |_, _| true)?);
            let recross: Vec<usize> = run
                .results
                .iter()
                .enumerate()
                .filter(|(_, r)| r.fate == Fate::Recross)
                .map(|(i, _)| i)
                .collect();
            let summary = json!({
                "limiting_upper": traces.limiting_upper,
                "limiting_lower": traces.limiting_lower,
                "recross": recross,
            });
            p.files.push(output::write_json(out.join("traces.json"), &summary)?);
        }
        Experiment::Stats(params) => {
            let pes = Pes::new(cfg.pes)?;
            let run = run_line_experiment(&pes, params.h0, params.density, &cfg.integrator)?;
            line_files(&run, &pes, params.h0, params.density, out, &mut p)?;
            p.files.push(output::write_stats(out.join("stats.csv"), &run.stats)?);
            let hist = angle_histogram(&run.stats, params.bin_width_deg);
            p.files.push(output::write_json(out.join("histogram.json"), &hist)?);
        }
        Experiment::SweepSurface(params) => {
            let h0s = params.h0.values()?;
            let xis = params.xi.values()?;
            let per_row = xis.len();
            let mut done = 0usize;
            let table = sweep_surface(&cfg.pes, &h0s, &xis, params.density, &cfg.integrator, |cell| {
                done += 1;
                if done.is_multiple_of(per_row) {
                    progress(&format!("sweep-surface: row H0={} done ({done} cells)", num(cell.h0)));
                }
            });
            for cell in &table.cells {
                cell_warnings(cell, &mut p.warnings);
                let c = &cell.counts;
                p.counts.top += c.top;
                p.counts.bottom += c.bottom;
                p.counts.recross += c.recross;
                p.counts.timeout += c.timeout;
            }
            p.files.push(output::write_surface(out.join("surface.csv"), &table)?);
            p.grids = json!({ "h0": h0s, "xi": xis, "density": params.density });
        }
        Experiment::FateMap(params) => {
            let pes = Pes::new(cfg.pes)?;
            let map = fate_map(&pes, params.h0, &params.grid, &cfg.integrator)?;
            p.files.push(output::write_fate_map(out.join(output::fate_map_name(cfg.pes.vri_x)), &map)?);
            p.counts = map.counts();
            p.inaccessible = Some(map.labels.len() - map.accessible_count());
            p.grids = json!({
                "h0": params.h0,
                "xi": cfg.pes.vri_x,
                "n_y": params.grid.n_y,
                "n_py": params.grid.n_py,
                "y_half": map.y_half,
                "py_half": map.py_half,
            });
        }
        Experiment::SweepSlice(params) => {
            let xis = params.xi.values()?;
            let mut inaccessible = 0usize;
            let mut counts = FateCounts::default();
            let mut files = Vec::new();
            let sweep = sweep_slice_with(&cfg.pes, params.h0, &xis, &params.grid, &cfg.integrator, |map| {
                files.push(output::write_fate_map(out.join(output::fate_map_name(map.vri_x)), map)?);
                let c = map.counts();
                counts.top += c.top;
                counts.bottom += c.bottom;
                counts.recross += c.recross;
                counts.timeout += c.timeout;
                inaccessible += map.labels.len() - map.accessible_count();
                progress(&format!(
                    "sweep-slice: xi={} recross fraction {}",
                    num(map.vri_x),
                    num(c.fraction(Fate::Recross))
                ));
                Ok(())
            })?;
            for row in &sweep.rows {
                if row.frac_timeout > crate::experiments::TIMEOUT_FLAG_FRACTION {
                    p.warnings.push(format!(
                        "xi={}: timeout fraction {} exceeds limit",
                        num(row.xi),
                        num(row.frac_timeout)
                    ));
                }
            }
            p.files = files;
            p.files.push(output::write_slice_sweep(out.join("slice_sweep.csv"), &sweep)?);
            p.files.push(output::write_json(out.join("fit.json"), &sweep.fit)?);
            p.counts = counts;
            p.inaccessible = Some(inaccessible);
            p.grids = json!({
                "h0": params.h0,
                "xi": xis,
                "n_y": params.grid.n_y,
                "n_py": params.grid.n_py,
            });
        }
    }
    Ok(p)
}
