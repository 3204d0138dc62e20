//! Run configuration: a TOML document with `[pes]`, `[integrator]`,
//! `[experiment]` and `[run]` tables. Every key is optional and defaults to
//! the reference setup; unknown keys are rejected.
//!
//! Precedence, lowest first: built-in defaults, config file, command-line
//! flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::SliceGridSpec;
use crate::error::{Error, Result};
use crate::experiments::decimal_grid;
use crate::integrator::IntegratorConfig;
use crate::pes::PesSpec;

/// Inclusive arithmetic grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Range { start, stop, step }
    }

    pub fn single(v: f64) -> Self {
        Range::new(v, v, 1.0)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        decimal_grid(self.start, self.stop, self.step)
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = self.start.is_finite()
            && self.stop.is_finite()
            && self.step.is_finite()
            && self.step > 0.0
            && self.stop >= self.start;
        if !ok {
            return Err(Error::Validation(format!(
                "{name}: need finite start <= stop and step > 0, got {:?}",
                self
            )));
        }
        let n = ((self.stop - self.start) / self.step).round();
        if n > 1e7 {
            return Err(Error::Validation(format!("{name}: {n} grid points is too many")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LineParams {
    pub h0: f64,
    pub density: f64,
}

impl Default for LineParams {
    fn default() -> Self {
        LineParams {
            h0: 0.03,
            density: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PesInfoParams {
    /// Energy used for the bottleneck width and slice area.
    pub h0: f64,
}

impl Default for PesInfoParams {
    fn default() -> Self {
        PesInfoParams { h0: 0.03 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceParams {
    pub h0: f64,
    pub density: f64,
    /// Path sampling interval, replacing `integrator.sample_interval`.
    pub sample_interval: f64,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            h0: 0.03,
            density: 500.0,
            sample_interval: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceParams {
    pub h0: Range,
    pub xi: Range,
    pub density: f64,
}

impl Default for SurfaceParams {
    fn default() -> Self {
        SurfaceParams {
            h0: Range::new(0.005, 0.1, 0.001),
            xi: Range::new(0.2, 0.45, 0.0025),
            density: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FateMapParams {
    pub h0: f64,
    pub grid: SliceGridSpec,
}

impl Default for FateMapParams {
    fn default() -> Self {
        FateMapParams {
            h0: 0.03,
            grid: SliceGridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SliceParams {
    pub h0: f64,
    pub xi: Range,
    pub grid: SliceGridSpec,
}

impl Default for SliceParams {
    fn default() -> Self {
        SliceParams {
            h0: 0.03,
            xi: Range::new(0.025, 0.7, 0.025),
            grid: SliceGridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsParams {
    pub h0: f64,
    pub density: f64,
    pub bin_width_deg: f64,
}

impl Default for StatsParams {
    fn default() -> Self {
        StatsParams {
            h0: 0.03,
            density: 500.0,
            bin_width_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    PesInfo(PesInfoParams),
    LineRun(LineParams),
    SweepSurface(SurfaceParams),
    FateMap(FateMapParams),
    SweepSlice(SliceParams),
    Traces(TraceParams),
    Stats(StatsParams),
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment::PesInfo(PesInfoParams::default())
    }
}

impl Experiment {
    pub fn kind(&self) -> Kind {
        match self {
            Experiment::PesInfo(_) => Kind::PesInfo,
            Experiment::LineRun(_) => Kind::LineRun,
            Experiment::SweepSurface(_) => Kind::SweepSurface,
            Experiment::FateMap(_) => Kind::FateMap,
            Experiment::SweepSlice(_) => Kind::SweepSlice,
            Experiment::Traces(_) => Kind::Traces,
            Experiment::Stats(_) => Kind::Stats,
        }
    }

    pub fn default_for(kind: Kind) -> Self {
        match kind {
            Kind::PesInfo => Experiment::PesInfo(PesInfoParams::default()),
            Kind::LineRun => Experiment::LineRun(LineParams::default()),
            Kind::SweepSurface => Experiment::SweepSurface(SurfaceParams::default()),
            Kind::FateMap => Experiment::FateMap(FateMapParams::default()),
            Kind::SweepSlice => Experiment::SweepSlice(SliceParams::default()),
            Kind::Traces => Experiment::Traces(TraceParams::default()),
            Kind::Stats => Experiment::Stats(StatsParams::default()),
        }
    }

    fn validate(&self) -> Result<()> {
        let h0_ok = |h0: f64| {
            if h0.is_finite() && h0 > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("experiment.h0 must be > 0, got {h0}")))
            }
        };
        let density_ok = |d: f64| {
            if d.is_finite() && d > 0.0 {
                Ok(())
            } else {
                Err(Error::Validation(format!("experiment.density must be > 0, got {d}")))
            }
        };
        match self {
            Experiment::PesInfo(p) => h0_ok(p.h0),
            Experiment::LineRun(p) => {
                h0_ok(p.h0)?;
                density_ok(p.density)
            }
            Experiment::Traces(p) => {
                h0_ok(p.h0)?;
                density_ok(p.density)?;
                if !(p.sample_interval.is_finite() && p.sample_interval > 0.0) {
                    return Err(Error::Validation(format!(
                        "experiment.sample_interval must be > 0, got {}",
                        p.sample_interval
                    )));
                }
                Ok(())
            }
            Experiment::SweepSurface(p) => {
                p.h0.validate("experiment.h0")?;
                p.xi.validate("experiment.xi")?;
                if p.h0.start <= 0.0 {
                    return Err(Error::Validation("experiment.h0 grid must be > 0".into()));
                }
                density_ok(p.density)
            }
            Experiment::FateMap(p) => {
                h0_ok(p.h0)?;
                p.grid.validate()
            }
            Experiment::SweepSlice(p) => {
                h0_ok(p.h0)?;
                p.xi.validate("experiment.xi")?;
                p.grid.validate()
            }
            Experiment::Stats(p) => {
                h0_ok(p.h0)?;
                density_ok(p.density)?;
                if !(p.bin_width_deg.is_finite() && p.bin_width_deg > 0.0 && p.bin_width_deg <= 90.0) {
                    return Err(Error::Validation(format!(
                        "experiment.bin_width_deg must be in (0, 90], got {}",
                        p.bin_width_deg
                    )));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    PesInfo,
    LineRun,
    SweepSurface,
    FateMap,
    SweepSlice,
    Traces,
    Stats,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::PesInfo => "pes-info",
            Kind::LineRun => "line-run",
            Kind::SweepSurface => "sweep-surface",
            Kind::FateMap => "fate-map",
            Kind::SweepSlice => "sweep-slice",
            Kind::Traces => "traces",
            Kind::Stats => "stats",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out: PathBuf::from("out"),
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub pes: PesSpec,
    pub integrator: IntegratorConfig,
    pub experiment: Experiment,
    pub run: RunSection,
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml(&text).map_err(|e| match e {
            Error::ConfigParse(msg) => Error::ConfigParse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses `text` for the experiment `kind`. A document without an
    /// `[experiment]` table gets that kind's defaults; one declaring another
    /// kind is rejected.
    pub fn from_toml_for(text: &str, kind: Kind) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        let mut cfg = RunConfig::from_toml(text)?;
        cfg.select(kind, table.contains_key("experiment"))?;
        Ok(cfg)
    }

    pub fn load_for(path: &Path, kind: Kind) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml_for(&text, kind).map_err(|e| match e {
            Error::ConfigParse(msg) => Error::ConfigParse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.pes.validate()?;
        self.integrator.validate()?;
        self.experiment.validate()?;
        if self.run.out.as_os_str().is_empty() {
            return Err(Error::Validation("run.out must not be empty".into()));
        }
        Ok(())
    }

    /// Makes `kind` the experiment. Parameters already present for that kind
    /// are kept; a block of another kind is an error.
    pub fn select(&mut self, kind: Kind, explicit_block: bool) -> Result<()> {
        if self.experiment.kind() == kind {
            return Ok(());
        }
        if explicit_block {
            return Err(Error::Validation(format!(
                "config declares experiment '{}' but '{}' was requested",
                self.experiment.kind().name(),
                kind.name()
            )));
        }
        self.experiment = Experiment::default_for(kind);
        Ok(())
    }

    /// Applies command-line overrides on top of the current values.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.run.out = out.clone();
        }
        if let Some(w) = o.workers {
            self.run.workers = w;
        }
        if let Some(xi) = o.xi {
            self.pes.vri_x = xi;
        }
        if let Some(t) = o.tmax {
            self.integrator.t_max = t;
        }
        if let Some(r) = o.radius {
            self.integrator.capture_radius = r;
        }
        match &mut self.experiment {
            Experiment::PesInfo(p) => set(&mut p.h0, o.h0),
            Experiment::LineRun(p) => {
                set(&mut p.h0, o.h0);
                set(&mut p.density, o.density);
            }
            Experiment::Traces(p) => {
                set(&mut p.h0, o.h0);
                set(&mut p.density, o.density);
            }
            Experiment::Stats(p) => {
                set(&mut p.h0, o.h0);
                set(&mut p.density, o.density);
            }
            Experiment::SweepSurface(p) => {
                if let Some(h0) = o.h0 {
                    p.h0 = Range::single(h0);
                }
                if let Some(xi) = o.xi {
                    p.xi = Range::single(xi);
                }
                set(&mut p.density, o.density);
            }
            Experiment::FateMap(p) => {
                set(&mut p.h0, o.h0);
                set(&mut p.grid, o.grid);
            }
            Experiment::SweepSlice(p) => {
                set(&mut p.h0, o.h0);
                if let Some(xi) = o.xi {
                    p.xi = Range::single(xi);
                }
                set(&mut p.grid, o.grid);
            }
        }
    }
}

fn set<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Values given as command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub h0: Option<f64>,
    /// Sets the VRI location; sweeps collapse their `x_i` grid to this value.
    pub xi: Option<f64>,
    pub density: Option<f64>,
    pub grid: Option<SliceGridSpec>,
    pub tmax: Option<f64>,
    pub radius: Option<f64>,
}

/// Parses a `--grid` value of the form `NY,NPY`.
pub fn parse_grid(s: &str) -> Result<SliceGridSpec> {
    let bad = || Error::ConfigParse(format!("grid must look like NY,NPY, got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let n_y: usize = a.trim().parse().map_err(|_| bad())?;
    let n_py: usize = b.trim().parse().map_err(|_| bad())?;
    let grid = SliceGridSpec { n_y, n_py };
    grid.validate()?;
    Ok(grid)
}

/// Written next to the data files once a run completes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub code_version: String,
    pub command: String,
    pub config: RunConfig,
    pub grids: serde_json::Value,
    pub wall_time_s: f64,
    pub counts: crate::experiments::FateCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inaccessible: Option<usize>,
    /// Flagged or failed cells.
    #[serde(default)]
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        m.config.validate()?;
        if m.config.experiment.kind().name() != m.command {
            return Err(Error::Validation(format!(
                "manifest command '{}' does not match experiment '{}'",
                m.command,
                m.config.experiment.kind().name()
            )));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::from_json(&text)
    }
}
