//! Fourth-order symplectic splitting (Forest–Ruth / Yoshida triple jump)
//! for the separable Hamiltonian, run at a fixed step.

use super::{vector_field_phase, Phase, Scheme, StepTaken};
use crate::error::Result;
use crate::pes::Pes;

const CBRT2: f64 = 1.259_921_049_894_873_2;
const W1: f64 = 1.0 / (2.0 - CBRT2);
const W0: f64 = -CBRT2 / (2.0 - CBRT2);
const DRIFT: [f64; 4] = [0.5 * W1, 0.5 * (W0 + W1), 0.5 * (W0 + W1), 0.5 * W1];
const KICK: [f64; 3] = [W1, W0, W1];

pub(crate) struct Yoshida4<'a> {
    pes: &'a Pes,
    h: f64,
    // endpoints and derivatives of the last step for Hermite interpolation
    y0: Phase,
    f0: Phase,
    y1: Phase,
    f1: Phase,
    h_last: f64,
}

impl<'a> Yoshida4<'a> {
    pub(crate) fn new(pes: &'a Pes, h: f64) -> Self {
        Yoshida4 {
            pes,
            h,
            y0: [0.0; 4],
            f0: [0.0; 4],
            y1: [0.0; 4],
            f1: [0.0; 4],
            h_last: 0.0,
        }
    }

    fn advance(&self, y: &Phase, h: f64) -> Phase {
        let spec = self.pes.spec();
        let (inv_mx, inv_my) = (1.0 / spec.mass_x, 1.0 / spec.mass_y);
        let [mut x, mut q, mut px, mut py] = *y;
        for i in 0..4 {
            x += DRIFT[i] * h * px * inv_mx;
            q += DRIFT[i] * h * py * inv_my;
            if i < 3 {
                let (gx, gy) = self.pes.gradient(x, q);
                px -= KICK[i] * h * gx;
                py -= KICK[i] * h * gy;
            }
        }
        [x, q, px, py]
    }
}

impl Scheme for Yoshida4<'_> {
    fn step(&mut self, _t: f64, y: &Phase, h_max: f64) -> Result<StepTaken> {
        let last = self.h >= h_max;
        let h = if last { h_max } else { self.h };
        let y_new = self.advance(y, h);
        self.y0 = *y;
        self.f0 = vector_field_phase(self.pes, y);
        self.y1 = y_new;
        self.f1 = vector_field_phase(self.pes, &y_new);
        self.h_last = h;
        Ok(StepTaken {
            h,
            y_new,
            hit_limit: last,
        })
    }

    fn interpolate(&self, theta: f64) -> Phase {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let h = self.h_last;
        std::array::from_fn(|i| {
            h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i]
        })
    }

    fn substep(&self, y: &Phase, h: f64) -> Phase {
        self.advance(y, h)
    }
}
