use serde::{Deserialize, Serialize};

use super::stats::RecrossStats;
use super::{integrate_all, FateCounts, SweepCell};
use crate::ensembles::{line_ensemble, LineEnsembleSpec};
use crate::error::Result;
use crate::integrator::{Fate, IntegratorConfig, State, TrajectoryResult};
use crate::pes::Pes;

#[derive(Debug, Clone, PartialEq)]
pub struct LineRun {
    pub cell: SweepCell,
    pub initial: Vec<State>,
    pub results: Vec<TrajectoryResult>,
    pub stats: RecrossStats,
}

/// Integrates the line ensemble at `h0` and tallies fates.
pub fn run_line_experiment(
    pes: &Pes,
    h0: f64,
    density: f64,
    cfg: &IntegratorConfig,
) -> Result<LineRun> {
    let initial = line_ensemble(&LineEnsembleSpec::new(h0, density), pes)?;
    let results = integrate_all(&initial, pes, cfg)?;
    let counts: FateCounts = results.iter().map(|r| r.fate).collect();
    let stats = RecrossStats::collect(&initial, &results);
    Ok(LineRun {
        cell: SweepCell::from_counts(h0, pes.spec().vri_x, &counts),
        initial,
        results,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Traces {
    /// Recrossing trajectory with the longest exit time among `y0 > 0`.
    pub limiting_upper: Option<usize>,
    /// Same among `y0 < 0`.
    pub limiting_lower: Option<usize>,
}

/// A line run with sampled paths retained (`cfg.sample_interval` must be > 0)
/// plus the limiting recrossing trajectories of each half line.
pub fn trace_ensemble(
    pes: &Pes,
    h0: f64,
    density: f64,
    cfg: &IntegratorConfig,
) -> Result<(LineRun, Traces)> {
    if !(cfg.sample_interval > 0.0) {
        return Err(crate::error::Error::Validation(
            "traces need integrator.sample_interval > 0".into(),
        ));
    }
    let run = run_line_experiment(pes, h0, density, cfg)?;
    let limiting = |upper: bool| {
        run.results
            .iter()
            .zip(&run.initial)
            .enumerate()
            .filter(|(_, (r, s))| r.fate == Fate::Recross && if upper { s.y > 0.0 } else { s.y < 0.0 })
            // first index wins ties
            .fold(None::<(usize, f64)>, |best, (i, (r, _))| match best {
                Some((_, t)) if t >= r.elapsed => best,
                _ => Some((i, r.elapsed)),
            })
            .map(|(i, _)| i)
    };
    let traces = Traces {
        limiting_upper: limiting(true),
        limiting_lower: limiting(false),
    };
    Ok((run, traces))
}
