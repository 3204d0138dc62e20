//! Deterministic initial-condition families on the `x = 0` section.
//!
//! The line family puts all momentum along `+x` (`p_y = 0`); the slice family
//! covers the whole `(y, p_y)` section with `p_x > 0`. Both sit exactly on
//! the energy shell `H = H0` up to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::State;
use crate::pes::Pes;
use crate::quadrature;
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineEnsembleSpec {
    pub h0: f64,
    /// Trajectories per unit of bottleneck width.
    pub density: f64,
}

impl LineEnsembleSpec {
    pub fn new(h0: f64, density: f64) -> Self {
        LineEnsembleSpec { h0, density }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceGridSpec {
    pub n_y: usize,
    pub n_py: usize,
}

impl Default for SliceGridSpec {
    fn default() -> Self {
        SliceGridSpec {
            n_y: 1024,
            n_py: 1024,
        }
    }
}

impl SliceGridSpec {
    pub fn square(n: usize) -> Self {
        SliceGridSpec { n_y: n, n_py: n }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_y < 2 || self.n_py < 2 {
            return Err(Error::Validation(format!(
                "grid resolutions must be >= 2, got {}x{}",
                self.n_y, self.n_py
            )));
        }
        Ok(())
    }
}

/// Number of line states for a bottleneck of width `width`.
pub fn line_count(density: f64, width: f64) -> usize {
    ((density * width).ceil() as usize).max(2)
}

/// Uniform, endpoint-inclusive states on `x = 0, p_y = 0` across the
/// bottleneck, each with `p_x = √(2 m₁ (H0 − V(0, y)))`.
pub fn line_ensemble(spec: &LineEnsembleSpec, pes: &Pes) -> Result<Vec<State>> {
    if !(spec.density > 0.0 && spec.density.is_finite()) {
        return Err(Error::Validation(format!("density must be > 0, got {}", spec.density)));
    }
    let width = pes.bottleneck_width(spec.h0)?;
    let n = line_count(spec.density, width);
    let half_step = 0.5 * width / (n - 1) as f64;
    let mass_x = pes.spec().mass_x;
    Ok((0..n)
        .map(|k| {
            // (2k − (n − 1)) is an exact integer, so index k and n − 1 − k
            // produce exactly opposite y
            let y = (2.0 * k as f64 - (n - 1) as f64) * half_step;
            let px = (2.0 * mass_x * (spec.h0 - pes.potential(0.0, y))).max(0.0).sqrt();
            State::new(0.0, 0.0, y, px, 0.0)
        })
        .collect())
}

/// Cell-centred grid over the section bounding box with its accessibility mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceGrid {
    pub spec: SliceGridSpec,
    pub h0: f64,
    pub y_half: f64,
    pub py_half: f64,
    /// Row-major over `(iy, ipy)`; `None` for inaccessible cells.
    pub cells: Vec<Option<State>>,
}

impl SliceGrid {
    pub fn index(&self, iy: usize, ipy: usize) -> usize {
        iy * self.spec.n_py + ipy
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        centre(iy, self.spec.n_y, self.y_half)
    }

    pub fn py_at(&self, ipy: usize) -> f64 {
        centre(ipy, self.spec.n_py, self.py_half)
    }

    pub fn cell_area(&self) -> f64 {
        (2.0 * self.y_half / self.spec.n_y as f64) * (2.0 * self.py_half / self.spec.n_py as f64)
    }

    pub fn accessible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }
}

#[inline]
fn centre(i: usize, n: usize, half: f64) -> f64 {
    // symmetric about zero bit for bit: cell i and n − 1 − i negate
    (2.0 * i as f64 + 1.0 - n as f64) * (half / n as f64)
}

pub fn slice_grid(h0: f64, spec: &SliceGridSpec, pes: &Pes) -> Result<SliceGrid> {
    spec.validate()?;
    let width = pes.bottleneck_width(h0)?;
    let s = pes.spec();
    let (m1, m2) = (s.mass_x, s.mass_y);
    let mut grid = SliceGrid {
        spec: *spec,
        h0,
        y_half: 0.5 * width,
        py_half: (2.0 * m2 * h0).sqrt(),
        cells: Vec::with_capacity(spec.n_y * spec.n_py),
    };
    for iy in 0..spec.n_y {
        let y = grid.y_at(iy);
        let budget = 2.0 * m1 * (h0 - pes.potential(0.0, y));
        for ipy in 0..spec.n_py {
            let py = grid.py_at(ipy);
            let px2 = budget - (m1 / m2) * py * py;
            grid.cells
                .push((px2 > 0.0).then(|| State::new(0.0, 0.0, y, px2.sqrt(), py)));
        }
    }
    Ok(grid)
}

/// Area of `{(y, p_y) : V(0, y) + p_y²/(2 m₂) ≤ H0}`.
///
/// Uses `y = (W/2) sin φ`, which turns the square-root endpoint behaviour of
/// the integrand into a smooth factor `cos φ`.
pub fn slice_area(pes: &Pes, h0: f64) -> Result<f64> {
    let half = 0.5 * pes.bottleneck_width(h0)?;
    let m2 = pes.spec().mass_y;
    let integrand = |phi: f64| {
        let y = half * phi.sin();
        let gap = (h0 - pes.potential(0.0, y)).max(0.0);
        2.0 * (2.0 * m2 * gap).sqrt() * half * phi.cos()
    };
    let one_side = quadrature::integrate(
        integrand,
        0.0,
        std::f64::consts::FRAC_PI_2,
        0.01 * tolerances::QUADRATURE_REL,
    );
    Ok(2.0 * one_side)
}
