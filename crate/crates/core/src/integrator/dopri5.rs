//! Dormand–Prince 5(4) with Hairer's fourth-order dense output.

use super::{vector_field_phase, Phase, Scheme, StepTaken};
use crate::error::{Error, Result};
use crate::pes::Pes;


const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[inline]
fn axpy(y: &Phase, terms: &[(f64, &Phase)], h: f64) -> Phase {
    let mut out = [0.0; 4];
    for i in 0..4 {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
    out
}

struct Stages {
    y5: Phase,
    k: [Phase; 7],
}

#[inline]
fn stages(pes: &Pes, y: &Phase, k1: &Phase, h: f64) -> Stages {
    let k2 = vector_field_phase(pes, &axpy(y, &[(A21, k1)], h));
    let k3 = vector_field_phase(pes, &axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = vector_field_phase(pes, &axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = vector_field_phase(
        pes,
        &axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    );
    let k6 = vector_field_phase(
        pes,
        &axpy(y, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
    );
    let y5 = axpy(
        y,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        h,
    );
    let k7 = vector_field_phase(pes, &y5);
    Stages {
        y5,
        k: [*k1, k2, k3, k4, k5, k6, k7],
    }
}

pub(crate) struct Dopri5<'a> {
    pes: &'a Pes,
    rtol: f64,
    atol: f64,
    h: f64,
    k1: Phase,
    k1_valid: bool,
    // dense output of the last accepted step
    rcont: [Phase; 5],
}

impl<'a> Dopri5<'a> {
    pub(crate) fn new(pes: &'a Pes, rtol: f64, atol: f64) -> Self {
        Dopri5 {
            pes,
            rtol,
            atol,
            h: 0.0,
            k1: [0.0; 4],
            k1_valid: false,
            rcont: [[0.0; 4]; 5],
        }
    }

    fn error_norm(&self, y: &Phase, y5: &Phase, k: &[Phase; 7], h: f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..4 {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = self.atol + self.rtol * y[i].abs().max(y5[i].abs());
            sum += (e / sc) * (e / sc);
        }
        (sum / 4.0).sqrt()
    }

    fn initial_step(&self, y: &Phase, f0: &Phase) -> f64 {
        let norm = |v: &Phase| {
            let s: f64 = (0..4)
                .map(|i| {
                    let sc = self.atol + self.rtol * y[i].abs();
                    (v[i] / sc).powi(2)
                })
                .sum();
            (s / 4.0).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(y, &[(1.0, f0)], h0);
        let f1 = vector_field_phase(self.pes, &y1);
        let diff: Phase = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }
}

impl Scheme for Dopri5<'_> {
    fn step(&mut self, t: f64, y: &Phase, h_max: f64) -> Result<StepTaken> {
        if !self.k1_valid {
            self.k1 = vector_field_phase(self.pes, y);
            self.k1_valid = true;
            if self.h == 0.0 {
                self.h = self.initial_step(y, &self.k1);
            }
        }
        let mut rejected = false;
        loop {
            let last = self.h >= h_max;
            let h = if last { h_max } else { self.h };
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h < h_min && !last {
                return Err(Error::Stalled {
                    state: super::State::from_phase(t, y),
                    step: h,
                });
            }
            let st = stages(self.pes, y, &self.k1, h);
            let err = self.error_norm(y, &st.y5, &st.k, h);
            if !err.is_finite() {
                self.h = h * FAC_MIN;
                rejected = true;
                continue;
            }
            if err <= 1.0 {
                let fac_max = if rejected { 1.0 } else { FAC_MAX };
                let fac = (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max);
                let k = &st.k;
                let ydiff: Phase = std::array::from_fn(|i| st.y5[i] - y[i]);
                let bspl: Phase = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
                self.rcont = [
                    *y,
                    ydiff,
                    bspl,
                    std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]),
                    std::array::from_fn(|i| {
                        h * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i]
                            + D6 * k[5][i]
                            + D7 * k[6][i])
                    }),
                ];
                self.k1 = k[6];
                // keep the unclamped proposal when the step was shortened to land on h_max
                self.h = if last && h < self.h { self.h } else { h * fac };
                return Ok(StepTaken {
                    h,
                    y_new: st.y5,
                    hit_limit: last,
                });
            }
            self.h = h * (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            rejected = true;
        }
    }

    fn interpolate(&self, theta: f64) -> Phase {
        let t1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + t1 * (r[2][i] + theta * (r[3][i] + t1 * r[4][i])))
        })
    }

    fn substep(&self, y: &Phase, h: f64) -> Phase {
        let k1 = vector_field_phase(self.pes, y);
        stages(self.pes, y, &k1, h).y5
    }
}
