//! The numerical studies: line-ensemble runs and sweeps, fate maps on the
//! `(y, p_y)` section, recrossing statistics and the quadratic law.
//!
//! Ensembles are integrated with a rayon parallel map; results are always
//! gathered in initial-condition order, so every output is independent of
//! the worker count.

mod fatemap;
mod fit;
mod line;
mod stats;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{self, Fate, IntegratorConfig, State, TrajectoryResult};
use crate::pes::Pes;

pub use fatemap::{fate_map, recross_fraction_slice, FateMap};
pub use fit::{quadratic_fit, QuadraticFit};
pub use line::{run_line_experiment, trace_ensemble, LineRun, Traces};
pub use stats::{angle_histogram, spearman, AngleHistogram, RecrossRecord, RecrossStats};
pub use sweep::{
    decimal_grid, interior_maximum, local_maxima, sweep_slice, sweep_slice_with, sweep_surface,
    SliceRow, SliceSweep, SweepCell, SweepTable,
};

/// TIMEOUT share above which a sweep cell is flagged.
pub const TIMEOUT_FLAG_FRACTION: f64 = 0.005;

/// Per-class trajectory counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FateCounts {
    pub top: usize,
    pub bottom: usize,
    pub recross: usize,
    pub timeout: usize,
}

impl FateCounts {
    pub fn add(&mut self, fate: Fate) {
        match fate {
            Fate::TopWell => self.top += 1,
            Fate::BottomWell => self.bottom += 1,
            Fate::Recross => self.recross += 1,
            Fate::Timeout => self.timeout += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.top + self.bottom + self.recross + self.timeout
    }

    pub fn get(&self, fate: Fate) -> usize {
        match fate {
            Fate::TopWell => self.top,
            Fate::BottomWell => self.bottom,
            Fate::Recross => self.recross,
            Fate::Timeout => self.timeout,
        }
    }

    pub fn fraction(&self, fate: Fate) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.get(fate) as f64 / n as f64,
        }
    }
}

impl FromIterator<Fate> for FateCounts {
    fn from_iter<I: IntoIterator<Item = Fate>>(iter: I) -> Self {
        let mut c = FateCounts::default();
        for f in iter {
            c.add(f);
        }
        c
    }
}

/// Integrates every state, returning results in input order. The error of the
/// lowest failing index is reported.
pub fn integrate_all(
    states: &[State],
    pes: &Pes,
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectoryResult>> {
    let out: Vec<Result<TrajectoryResult>> = states
        .par_iter()
        .map(|s| integrator::integrate(s, pes, cfg))
        .collect();
    out.into_iter()
        .enumerate()
        .map(|(traj_id, r)| {
            r.map_err(|e| Error::Trajectory {
                traj_id,
                source: Box::new(e),
            })
        })
        .collect()
}
