use serde::{Deserialize, Serialize};

use super::fatemap::{fate_map, FateMap};
use super::fit::{quadratic_fit, QuadraticFit};
use super::line::run_line_experiment;
use super::{FateCounts, TIMEOUT_FLAG_FRACTION};
use crate::ensembles::{slice_area, SliceGridSpec};
use crate::error::{Error, Result};
use crate::integrator::{Fate, IntegratorConfig};
use crate::pes::{Pes, PesSpec};

/// `start, start + step, …, stop` with values snapped to ten decimals so
/// grid points print as their decimal literals.
pub fn decimal_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Validation(format!(
            "bad grid start={start} stop={stop} step={step}"
        )));
    }
    let n = ((stop - start) / step).round() as usize + 1;
    Ok((0..n)
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

/// One `(H0, x_i)` cell of a line-ensemble sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub h0: f64,
    pub xi: f64,
    pub n: usize,
    pub frac_recross: f64,
    pub frac_top: f64,
    pub frac_bottom: f64,
    pub frac_timeout: f64,
    pub counts: FateCounts,
    /// TIMEOUT share above [`TIMEOUT_FLAG_FRACTION`].
    pub flagged: bool,
    pub error: Option<String>,
}

impl SweepCell {
    pub fn from_counts(h0: f64, xi: f64, counts: &FateCounts) -> Self {
        SweepCell {
            h0,
            xi,
            n: counts.total(),
            frac_recross: counts.fraction(Fate::Recross),
            frac_top: counts.fraction(Fate::TopWell),
            frac_bottom: counts.fraction(Fate::BottomWell),
            frac_timeout: counts.fraction(Fate::Timeout),
            counts: *counts,
            flagged: counts.fraction(Fate::Timeout) > TIMEOUT_FLAG_FRACTION,
            error: None,
        }
    }

    pub fn failed(h0: f64, xi: f64, err: &Error) -> Self {
        SweepCell {
            h0,
            xi,
            n: 0,
            frac_recross: f64::NAN,
            frac_top: f64::NAN,
            frac_bottom: f64::NAN,
            frac_timeout: f64::NAN,
            counts: FateCounts::default(),
            flagged: true,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub h0s: Vec<f64>,
    pub xis: Vec<f64>,
    pub density: f64,
    /// Row-major: one row per `H0`, one column per `x_i`.
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn row(&self, h0_index: usize) -> &[SweepCell] {
        let n = self.xis.len();
        &self.cells[h0_index * n..(h0_index + 1) * n]
    }

    pub fn recross_row(&self, h0_index: usize) -> Vec<f64> {
        self.row(h0_index).iter().map(|c| c.frac_recross).collect()
    }
}

/// Line-ensemble recrossing fractions over an `(H0, x_i)` grid. Coefficients
/// are re-solved for every `x_i`; failing cells are recorded and skipped.
pub fn sweep_surface(
    base: &PesSpec,
    h0s: &[f64],
    xis: &[f64],
    density: f64,
    cfg: &IntegratorConfig,
    mut on_cell: impl FnMut(&SweepCell),
) -> SweepTable {
    let pes_by_xi: Vec<Result<Pes>> = xis.iter().map(|&xi| Pes::new(base.with_vri_x(xi))).collect();
    let mut cells = Vec::with_capacity(h0s.len() * xis.len());
    for &h0 in h0s {
        for (&xi, pes) in xis.iter().zip(&pes_by_xi) {
            let cell = match pes {
                Ok(pes) => match run_line_experiment(pes, h0, density, cfg) {
                    Ok(run) => run.cell,
                    Err(e) => SweepCell::failed(h0, xi, &e),
                },
                Err(e) => SweepCell::failed(h0, xi, e),
            };
            on_cell(&cell);
            cells.push(cell);
        }
    }
    SweepTable {
        h0s: h0s.to_vec(),
        xis: xis.to_vec(),
        density,
        cells,
    }
}

/// Index of the (first) maximum when it is not at either end.
pub fn interior_maximum(values: &[f64]) -> Option<usize> {
    let (idx, _) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .fold(None::<(usize, f64)>, |best, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })?;
    (idx > 0 && idx + 1 < values.len()).then_some(idx)
}

/// Local maxima (strictly above both neighbours, or above the single
/// neighbour at an end), ordered by decreasing value.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut out: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] > values[i - 1];
            let right = i + 1 == n || values[i] > values[i + 1];
            left && right && n > 1
        })
        .collect();
    out.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub xi: f64,
    pub accessible: usize,
    pub counts: FateCounts,
    pub frac_recross: f64,
    pub frac_top: f64,
    pub frac_bottom: f64,
    pub frac_timeout: f64,
    pub slice_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSweep {
    pub h0: f64,
    pub grid: SliceGridSpec,
    pub rows: Vec<SliceRow>,
    pub fit: QuadraticFit,
}

impl SliceSweep {
    pub fn xis(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xi).collect()
    }

    pub fn recross(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.frac_recross).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.slice_area).collect()
    }
}

/// Fate map, recrossing fraction and slice area for every `x_i`, followed by
/// a quadratic fit of the fraction against `x_i`. Each map is handed to
/// `visit` before the next one is computed.
pub fn sweep_slice_with(
    base: &PesSpec,
    h0: f64,
    xis: &[f64],
    grid: &SliceGridSpec,
    cfg: &IntegratorConfig,
    mut visit: impl FnMut(&FateMap) -> Result<()>,
) -> Result<SliceSweep> {
    let mut rows = Vec::with_capacity(xis.len());
    for &xi in xis {
        let pes = Pes::new(base.with_vri_x(xi))?;
        let map = fate_map(&pes, h0, grid, cfg)?;
        let counts = map.counts();
        if counts.total() == 0 {
            return Err(Error::NoAccessibleCells);
        }
        rows.push(SliceRow {
            xi,
            accessible: counts.total(),
            counts,
            frac_recross: counts.fraction(Fate::Recross),
            frac_top: counts.fraction(Fate::TopWell),
            frac_bottom: counts.fraction(Fate::BottomWell),
            frac_timeout: counts.fraction(Fate::Timeout),
            slice_area: slice_area(&pes, h0)?,
        });
        visit(&map)?;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.xi).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.frac_recross).collect();
    let fit = quadratic_fit(&xs, &ys)?;
    Ok(SliceSweep {
        h0,
        grid: *grid,
        rows,
        fit,
    })
}

pub fn sweep_slice(
    base: &PesSpec,
    h0: f64,
    xis: &[f64],
    grid: &SliceGridSpec,
    cfg: &IntegratorConfig,
) -> Result<SliceSweep> {
    sweep_slice_with(base, h0, xis, grid, cfg, |_| Ok(()))
}
