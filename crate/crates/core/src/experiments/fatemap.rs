use rayon::prelude::*;

use super::FateCounts;
use crate::ensembles::{slice_grid, SliceGridSpec};
use crate::error::{Error, Result};
use crate::integrator::{self, Fate, IntegratorConfig};
use crate::pes::Pes;

/// Fate of every cell of the `(y, p_y)` section; `None` marks cells outside
/// the energetically accessible region.
#[derive(Debug, Clone, PartialEq)]
pub struct FateMap {
    pub h0: f64,
    pub vri_x: f64,
    pub grid: SliceGridSpec,
    pub y_half: f64,
    pub py_half: f64,
    pub labels: Vec<Option<Fate>>,
}

impl FateMap {
    pub fn index(&self, iy: usize, ipy: usize) -> usize {
        iy * self.grid.n_py + ipy
    }

    pub fn label(&self, iy: usize, ipy: usize) -> Option<Fate> {
        self.labels[self.index(iy, ipy)]
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        (2.0 * iy as f64 + 1.0 - self.grid.n_y as f64) * (self.y_half / self.grid.n_y as f64)
    }

    pub fn py_at(&self, ipy: usize) -> f64 {
        (2.0 * ipy as f64 + 1.0 - self.grid.n_py as f64) * (self.py_half / self.grid.n_py as f64)
    }

    pub fn counts(&self) -> FateCounts {
        self.labels.iter().flatten().copied().collect()
    }

    pub fn accessible_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Share of accessible cells with the given fate.
    pub fn fraction(&self, fate: Fate) -> Result<f64> {
        let counts = self.counts();
        if counts.total() == 0 {
            return Err(Error::NoAccessibleCells);
        }
        Ok(counts.fraction(fate))
    }

    /// True when cell `(iy, ipy)` and its mirror `(n_y−1−iy, n_py−1−ipy)`
    /// carry mirrored labels everywhere.
    pub fn is_mirror_symmetric(&self) -> bool {
        let (ny, npy) = (self.grid.n_y, self.grid.n_py);
        (0..ny).all(|iy| {
            (0..npy).all(|ipy| {
                self.label(iy, ipy).map(Fate::mirrored) == self.label(ny - 1 - iy, npy - 1 - ipy)
            })
        })
    }
}

/// Integrates every accessible cell of the section at `h0`.
pub fn fate_map(pes: &Pes, h0: f64, grid: &SliceGridSpec, cfg: &IntegratorConfig) -> Result<FateMap> {
    let slice = slice_grid(h0, grid, pes)?;
    let labels: Vec<Option<Result<Fate>>> = slice
        .cells
        .par_iter()
        .map(|cell| cell.map(|s| integrator::integrate(&s, pes, cfg).map(|r| r.fate)))
        .collect();
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(traj_id, l)| {
            l.transpose().map_err(|e| Error::Trajectory {
                traj_id,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FateMap {
        h0,
        vri_x: pes.spec().vri_x,
        grid: *grid,
        y_half: slice.y_half,
        py_half: slice.py_half,
        labels,
    })
}

/// Recrossing area over accessible area, counted in cells.
pub fn recross_fraction_slice(map: &FateMap) -> Result<f64> {
    map.fraction(Fate::Recross)
}
