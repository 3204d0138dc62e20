//! Data files. Every file is written as `<name>.partial` and renamed when
//! complete. Floats use the shortest representation that round-trips.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{FateMap, RecrossStats, SliceSweep, SweepTable};
use crate::integrator::{State, TrajectoryResult};

pub const FATES_HEADER: &str = "traj_id,fate,t_exit,x,y,px,py,energy_drift";
pub const PATHS_HEADER: &str = "traj_id,t,x,y,px,py";
pub const ENSEMBLE_HEADER: &str = "traj_id,y0,py0,px0";
pub const SURFACE_HEADER: &str = "H0,xi,N,frac_recross,frac_top,frac_bottom,frac_timeout";
pub const FATEMAP_HEADER: &str = "iy,ipy,y,py,fate";
pub const SLICE_HEADER: &str = "xi,frac_recross,frac_top,frac_bottom,frac_timeout,slice_area";
pub const STATS_HEADER: &str = "traj_id,y0,theta_dev_deg,rel_dpx,abs_dpy,rel_dp_total,t_exit";

pub const INACCESSIBLE: &str = "INACCESSIBLE";

/// Shortest round-trip decimal form; exponent notation for very large or
/// small magnitudes, `NaN`/`inf` for non-finite values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Line-oriented writer that only appears under its final name after
/// [`AtomicFile::finish`].
pub struct AtomicFile {
    path: PathBuf,
    partial: PathBuf,
    out: BufWriter<File>,
}

impl AtomicFile {
    pub fn create(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let partial = partial_path(&path);
        let file = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
        Ok(AtomicFile {
            path,
            partial,
            out: BufWriter::new(file),
        })
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| Error::io(&self.partial, e))
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.out.write_all(b",").map_err(|e| Error::io(&self.partial, e))?;
            }
            first = false;
            self.out
                .write_all(f.as_ref().as_bytes())
                .map_err(|e| Error::io(&self.partial, e))?;
        }
        self.out.write_all(b"\n").map_err(|e| Error::io(&self.partial, e))
    }

    pub fn finish(self) -> Result<PathBuf> {
        let AtomicFile { path, partial, out } = self;
        let file = out.into_inner().map_err(|e| Error::io(&partial, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&partial, e))?;
        drop(file);
        fs::rename(&partial, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: impl Into<PathBuf>, value: &T) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    let text = serde_json::to_string_pretty(value)?;
    f.line(&text)?;
    f.finish()
}

pub fn write_fates(path: impl Into<PathBuf>, results: &[TrajectoryResult]) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(FATES_HEADER)?;
    for (id, r) in results.iter().enumerate() {
        let s = &r.exit_state;
        f.row([
            id.to_string(),
            r.fate.label().to_string(),
            num(r.elapsed),
            num(s.x),
            num(s.y),
            num(s.px),
            num(s.py),
            num(r.max_energy_drift),
        ])?;
    }
    f.finish()
}

/// Sampled paths of the trajectories selected by `keep`.
pub fn write_paths(
    path: impl Into<PathBuf>,
    results: &[TrajectoryResult],
    keep: impl Fn(usize, &TrajectoryResult) -> bool,
) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(PATHS_HEADER)?;
    for (id, r) in results.iter().enumerate().filter(|(id, r)| keep(*id, r)) {
        for s in r.path.iter().flatten() {
            f.row([id.to_string(), num(s.t), num(s.x), num(s.y), num(s.px), num(s.py)])?;
        }
    }
    f.finish()
}

pub fn write_ensemble(path: impl Into<PathBuf>, states: &[State]) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(ENSEMBLE_HEADER)?;
    for (id, s) in states.iter().enumerate() {
        f.row([id.to_string(), num(s.y), num(s.py), num(s.px)])?;
    }
    f.finish()
}

pub fn write_surface(path: impl Into<PathBuf>, table: &SweepTable) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(SURFACE_HEADER)?;
    for c in &table.cells {
        f.row([
            num(c.h0),
            num(c.xi),
            c.n.to_string(),
            num(c.frac_recross),
            num(c.frac_top),
            num(c.frac_bottom),
            num(c.frac_timeout),
        ])?;
    }
    f.finish()
}

pub fn write_fate_map(path: impl Into<PathBuf>, map: &FateMap) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(FATEMAP_HEADER)?;
    for iy in 0..map.grid.n_y {
        let y = num(map.y_at(iy));
        for ipy in 0..map.grid.n_py {
            let label = map.label(iy, ipy).map_or(INACCESSIBLE, |fate| fate.label());
            f.row([iy.to_string(), ipy.to_string(), y.clone(), num(map.py_at(ipy)), label.to_string()])?;
        }
    }
    f.finish()
}

/// File name used for the fate map at `xi`.
pub fn fate_map_name(xi: f64) -> String {
    format!("fatemap_xi{}.csv", num(xi))
}

pub fn write_slice_sweep(path: impl Into<PathBuf>, sweep: &SliceSweep) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(SLICE_HEADER)?;
    for r in &sweep.rows {
        f.row([
            num(r.xi),
            num(r.frac_recross),
            num(r.frac_top),
            num(r.frac_bottom),
            num(r.frac_timeout),
            num(r.slice_area),
        ])?;
    }
    f.finish()
}

pub fn write_stats(path: impl Into<PathBuf>, stats: &RecrossStats) -> Result<PathBuf> {
    let mut f = AtomicFile::create(path)?;
    f.line(STATS_HEADER)?;
    for r in &stats.records {
        f.row([
            r.traj_id.to_string(),
            num(r.y0),
            num(r.theta_dev_deg),
            num(r.rel_dpx),
            num(r.abs_dpy),
            num(r.rel_dp_total),
            num(r.t_exit),
        ])?;
    }
    f.finish()
}
