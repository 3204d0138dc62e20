//! Hamilton's equations on the surface, with fate classification.
//!
//! A trajectory ends at the first of: capture in the top or bottom well
//! circle, a return across `x = 0` with `p_x < 0` after having reached
//! `x ≥ X_ENTRY_MIN`, or the time horizon.

mod dopri5;
mod symplectic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pes::Pes;
use crate::tolerances;

pub(crate) type Phase = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl State {
    pub fn new(t: f64, x: f64, y: f64, px: f64, py: f64) -> Self {
        State { t, x, y, px, py }
    }

    pub(crate) fn from_phase(t: f64, p: &Phase) -> Self {
        State {
            t,
            x: p[0],
            y: p[1],
            px: p[2],
            py: p[3],
        }
    }

    pub(crate) fn phase(&self) -> Phase {
        [self.x, self.y, self.px, self.py]
    }

    /// Reflection `(y, p_y) → (−y, −p_y)`.
    pub fn mirrored(&self) -> Self {
        State {
            y: -self.y,
            py: -self.py,
            ..*self
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phase().iter().all(|v| v.is_finite()) && self.t.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Fate {
    TopWell,
    BottomWell,
    Recross,
    Timeout,
}

impl Fate {
    pub const ALL: [Fate; 4] = [Fate::TopWell, Fate::BottomWell, Fate::Recross, Fate::Timeout];

    pub fn label(self) -> &'static str {
        match self {
            Fate::TopWell => "TOP",
            Fate::BottomWell => "BOTTOM",
            Fate::Recross => "RECROSS",
            Fate::Timeout => "TIMEOUT",
        }
    }

    /// Fate of the mirror-image trajectory.
    pub fn mirrored(self) -> Self {
        match self {
            Fate::TopWell => Fate::BottomWell,
            Fate::BottomWell => Fate::TopWell,
            other => other,
        }
    }
}

impl fmt::Display for Fate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Fate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TOP" => Ok(Fate::TopWell),
            "BOTTOM" => Ok(Fate::BottomWell),
            "RECROSS" => Ok(Fate::Recross),
            "TIMEOUT" => Ok(Fate::Timeout),
            other => Err(Error::ConfigParse(format!("unknown fate label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Dormand–Prince 5(4) with dense output.
    Adaptive,
    /// Fixed-step fourth-order symplectic splitting.
    Symplectic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step for the symplectic method.
    pub step_size: f64,
    pub t_max: f64,
    pub capture_radius: f64,
    /// Path sampling interval; 0 disables sampling.
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Adaptive,
            rel_tol: 1e-11,
            abs_tol: 1e-11,
            step_size: 5e-3,
            t_max: 200.0,
            capture_radius: 0.2,
            sample_interval: 0.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("step_size", self.step_size),
            ("t_max", self.t_max),
            ("capture_radius", self.capture_radius),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Validation(format!("integrator.{name} must be finite and > 0, got {v}")));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval >= 0.0) {
            return Err(Error::Validation(format!(
                "integrator.sample_interval must be >= 0, got {}",
                self.sample_interval
            )));
        }
        Ok(())
    }

    /// Same configuration with both tolerances (or the fixed step) halved.
    pub fn refined(&self) -> Self {
        IntegratorConfig {
            rel_tol: 0.5 * self.rel_tol,
            abs_tol: 0.5 * self.abs_tol,
            step_size: 0.5 * self.step_size,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub fate: Fate,
    /// Exit state, localized on the triggering event surface.
    pub exit_state: State,
    pub elapsed: f64,
    pub initial_energy: f64,
    pub max_energy_drift: f64,
    pub steps: usize,
    pub path: Option<Vec<State>>,
}

/// `p_x²/(2m₁) + p_y²/(2m₂) + V(x, y)`.
#[inline]
pub fn hamiltonian(s: &State, pes: &Pes) -> f64 {
    let spec = pes.spec();
    s.px * s.px / (2.0 * spec.mass_x) + s.py * s.py / (2.0 * spec.mass_y) + pes.potential(s.x, s.y)
}

#[inline]
pub(crate) fn vector_field_phase(pes: &Pes, p: &Phase) -> Phase {
    let spec = pes.spec();
    let (gx, gy) = pes.gradient(p[0], p[1]);
    [p[2] / spec.mass_x, p[3] / spec.mass_y, -gx, -gy]
}

/// Time derivative of the state, as `(ẋ, ẏ, ṗ_x, ṗ_y)`.
pub fn vector_field(s: &State, pes: &Pes) -> [f64; 4] {
    vector_field_phase(pes, &s.phase())
}

/// Maximum energy drift recorded on the result.
pub fn energy_drift(result: &TrajectoryResult) -> f64 {
    result.max_energy_drift
}

pub(crate) struct StepTaken {
    pub h: f64,
    pub y_new: Phase,
    pub hit_limit: bool,
}

pub(crate) trait Scheme {
    /// Takes one accepted step from `y`, never longer than `h_max`.
    fn step(&mut self, t: f64, y: &Phase, h_max: f64) -> Result<StepTaken>;
    /// State at fraction `theta` of the last accepted step.
    fn interpolate(&self, theta: f64) -> Phase;
    /// A single uncontrolled step of size `h` from `y`.
    fn substep(&self, y: &Phase, h: f64) -> Phase;
}

fn scheme<'a>(pes: &'a Pes, cfg: &IntegratorConfig) -> Box<dyn Scheme + 'a> {
    match cfg.method {
        Method::Adaptive => Box::new(dopri5::Dopri5::new(pes, cfg.rel_tol, cfg.abs_tol)),
        Method::Symplectic => Box::new(symplectic::Yoshida4::new(pes, cfg.step_size)),
    }
}

#[derive(Clone, Copy)]
struct Events {
    well_x: f64,
    well_y: f64,
    r2: f64,
}

impl Events {
    // order is the tie-break order
    const KINDS: [Fate; 3] = [Fate::TopWell, Fate::BottomWell, Fate::Recross];

    #[inline]
    fn value(&self, kind: Fate, p: &Phase) -> f64 {
        match kind {
            Fate::TopWell => {
                let dx = p[0] - self.well_x;
                let dy = p[1] - self.well_y;
                dx * dx + dy * dy - self.r2
            }
            Fate::BottomWell => {
                let dx = p[0] - self.well_x;
                let dy = p[1] + self.well_y;
                dx * dx + dy * dy - self.r2
            }
            Fate::Recross => p[0],
            Fate::Timeout => unreachable!("timeout is not an event surface"),
        }
    }
}

const SAMPLE_THETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Localizes a falling zero of `kind` in `[lo, hi]` (fractions of the step),
/// preferring true sub-steps from `y0` and falling back to the interpolant.
#[allow(clippy::too_many_arguments)]
fn localize(
    scheme: &dyn Scheme,
    events: &Events,
    kind: Fate,
    y0: &Phase,
    y1: &Phase,
    h: f64,
    lo: f64,
    hi: f64,
) -> (f64, Phase) {
    let stepped = |theta: f64| -> Phase {
        if theta == 0.0 {
            *y0
        } else if theta == 1.0 {
            *y1
        } else {
            scheme.substep(y0, theta * h)
        }
    };
    let candidates = [(lo, hi), (0.0, hi), (lo, 1.0), (0.0, 1.0)];
    for (a, b) in candidates {
        if let Some(found) = bisect_event(&stepped, events, kind, a, b) {
            return found;
        }
    }
    let interp = |theta: f64| scheme.interpolate(theta);
    bisect_event(&interp, events, kind, lo, hi).unwrap_or((hi, interp(hi)))
}

fn bisect_event<F: Fn(f64) -> Phase>(
    state_at: &F,
    events: &Events,
    kind: Fate,
    mut a: f64,
    mut b: f64,
) -> Option<(f64, Phase)> {
    let pa = state_at(a);
    let mut pb = state_at(b);
    if !(events.value(kind, &pa) > 0.0 && events.value(kind, &pb) <= 0.0) {
        return None;
    }
    let target = 1e-3 * tolerances::EVENT_SURFACE;
    for _ in 0..200 {
        let gb = events.value(kind, &pb);
        if gb.abs() <= target {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let pm = state_at(mid);
        if events.value(kind, &pm) > 0.0 {
            a = mid;
        } else {
            b = mid;
            pb = pm;
        }
    }
    Some((b, pb))
}

/// Integrates from `s0` until the trajectory's fate is decided.
pub fn integrate(s0: &State, pes: &Pes, cfg: &IntegratorConfig) -> Result<TrajectoryResult> {
    if !s0.is_finite() {
        return Err(Error::NonFinite { state: *s0 });
    }
    let spec = pes.spec();
    let events = Events {
        well_x: spec.well_x,
        well_y: spec.well_y,
        r2: cfg.capture_radius * cfg.capture_radius,
    };
    let h0_energy = hamiltonian(s0, pes);
    let t_end = s0.t + cfg.t_max;
    let sampling = cfg.sample_interval > 0.0;
    let mut path = sampling.then(|| vec![*s0]);
    let mut next_sample = 1usize;

    let mut y = s0.phase();
    let mut t = s0.t;
    let mut drift = 0.0_f64;
    let mut steps = 0usize;
    let mut armed = y[0] >= tolerances::X_ENTRY_MIN;

    let finish = |fate: Fate, exit: State, drift: f64, steps: usize, path: Option<Vec<State>>| {
        let exit_drift = (hamiltonian(&exit, pes) - h0_energy).abs();
        TrajectoryResult {
            fate,
            exit_state: exit,
            elapsed: exit.t - s0.t,
            initial_energy: h0_energy,
            max_energy_drift: drift.max(exit_drift),
            steps,
            path,
        }
    };

    for kind in [Fate::TopWell, Fate::BottomWell] {
        if events.value(kind, &y) <= 0.0 {
            return Ok(finish(kind, *s0, 0.0, 0, path));
        }
    }

    let mut stepper = scheme(pes, cfg);
    loop {
        let taken = stepper.step(t, &y, t_end - t)?;
        steps += 1;
        let h = taken.h;
        let t_new = if taken.hit_limit { t_end } else { t + h };
        let y_new = taken.y_new;
        if !y_new.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                state: State::from_phase(t_new, &y_new),
            });
        }

        let samples: [Phase; 5] = std::array::from_fn(|k| match k {
            0 => y,
            4 => y_new,
            _ => stepper.interpolate(SAMPLE_THETAS[k]),
        });

        // earliest event within the step
        let mut hit: Option<(f64, Fate, Phase)> = None;
        for kind in Events::KINDS {
            let mut armed_here = armed;
            for k in 1..5 {
                let prev = events.value(kind, &samples[k - 1]);
                let cur = events.value(kind, &samples[k]);
                let allowed = kind != Fate::Recross || armed_here;
                if allowed && prev > 0.0 && cur <= 0.0 {
                    let (theta, p) = localize(
                        stepper.as_ref(),
                        &events,
                        kind,
                        &y,
                        &y_new,
                        h,
                        SAMPLE_THETAS[k - 1],
                        SAMPLE_THETAS[k],
                    );
                    if hit.is_none_or(|(best, _, _)| theta < best) {
                        hit = Some((theta, kind, p));
                    }
                    break;
                }
                if samples[k][0] >= tolerances::X_ENTRY_MIN {
                    armed_here = true;
                }
            }
        }

        let t_stop = hit.map(|(theta, _, _)| if theta == 1.0 { t_new } else { t + theta * h });
        if let Some(path) = path.as_mut() {
            let limit = t_stop.unwrap_or(t_new);
            loop {
                let ts = s0.t + next_sample as f64 * cfg.sample_interval;
                if ts > limit || (t_stop.is_some() && ts >= limit) {
                    break;
                }
                let p = if ts == t_new { y_new } else { stepper.interpolate((ts - t) / h) };
                path.push(State::from_phase(ts, &p));
                next_sample += 1;
            }
        }

        if let Some((_, kind, p)) = hit {
            let exit = State::from_phase(t_stop.unwrap_or(t_new), &p);
            if let Some(path) = path.as_mut() {
                path.push(exit);
            }
            return Ok(finish(kind, exit, drift, steps, path));
        }

        armed = armed || samples.iter().any(|p| p[0] >= tolerances::X_ENTRY_MIN);
        drift = drift.max((hamiltonian(&State::from_phase(t_new, &y_new), pes) - h0_energy).abs());
        y = y_new;
        t = t_new;
        if taken.hit_limit {
            let exit = State::from_phase(t, &y);
            if let Some(path) = path.as_mut() {
                if path.last().is_none_or(|s| s.t < t) {
                    path.push(exit);
                }
            }
            return Ok(finish(Fate::Timeout, exit, drift, steps, path));
        }
    }
}

/// Integrates for a fixed duration with no event surfaces.
pub fn propagate(s0: &State, pes: &Pes, cfg: &IntegratorConfig, duration: f64) -> Result<State> {
    if !(duration >= 0.0) {
        return Err(Error::Domain(format!("duration must be >= 0, got {duration}")));
    }
    let mut stepper = scheme(pes, cfg);
    let t_end = s0.t + duration;
    let mut y = s0.phase();
    let mut t = s0.t;
    while t < t_end {
        let taken = stepper.step(t, &y, t_end - t)?;
        y = taken.y_new;
        t = if taken.hit_limit { t_end } else { t + taken.h };
    }
    Ok(State::from_phase(t, &y))
}
