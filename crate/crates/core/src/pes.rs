//! The symmetric two-saddle potential energy surface.
//!
//! ```text
//! V(x, y) = (V‡ / x_s⁴) x² (x² − 2 x_s²) + A y² (x_i − x) + y⁴ (B + C x)
//! ```
//!
//! `V‡` is the barrier height of the index-1 saddle at the origin, `x_s` the
//! location of the lower saddle on the x-axis and `x_i` the location of the
//! valley-ridge inflection (VRI) point between them. `A`, `B`, `C` are fixed
//! by requiring minima of energy `H_w` at `(x_w, ±y_w)`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve3;
use crate::roots;
use crate::tolerances;

/// Design parameters of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PesSpec {
    pub barrier_height: f64,
    pub saddle_x: f64,
    pub vri_x: f64,
    pub well_x: f64,
    pub well_y: f64,
    pub well_energy: f64,
    pub mass_x: f64,
    pub mass_y: f64,
}

impl Default for PesSpec {
    fn default() -> Self {
        PesSpec {
            barrier_height: 0.5,
            saddle_x: 1.0,
            vri_x: 0.3265,
            well_x: 1.25,
            well_y: 1.0,
            well_energy: -1.0,
            mass_x: 1.0,
            mass_y: 1.0,
        }
    }
}

impl PesSpec {
    pub fn with_vri_x(self, vri_x: f64) -> Self {
        PesSpec { vri_x, ..self }
    }

    /// Checks positivity and the ordering `0 < x_i < x_s < x_w`.
    ///
    /// `well_y = 0` is accepted here and rejected by the coefficient solve.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("barrier_height", self.barrier_height),
            ("saddle_x", self.saddle_x),
            ("vri_x", self.vri_x),
            ("well_x", self.well_x),
            ("well_y", self.well_y),
            ("well_energy", self.well_energy),
            ("mass_x", self.mass_x),
            ("mass_y", self.mass_y),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("{name} must be finite")));
        }
        let positive = [
            ("barrier_height", self.barrier_height),
            ("saddle_x", self.saddle_x),
            ("mass_x", self.mass_x),
            ("mass_y", self.mass_y),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| *v <= 0.0) {
            return Err(Error::InvalidSpec(format!("{name} must be > 0, got {v}")));
        }
        if self.well_y < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "well_y must be >= 0, got {}",
                self.well_y
            )));
        }
        if !(0.0 < self.vri_x && self.vri_x < self.saddle_x) {
            return Err(Error::InvalidSpec(format!(
                "vri_x must satisfy 0 < vri_x < saddle_x = {}, got {}",
                self.saddle_x, self.vri_x
            )));
        }
        if self.well_x <= self.saddle_x {
            return Err(Error::InvalidSpec(format!(
                "well_x must exceed saddle_x = {}, got {}",
                self.saddle_x, self.well_x
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Residuals of the three well conditions at `(x_w, y_w)`: energy, `∂V/∂x`, `∂V/∂y`.
pub fn coefficient_residuals(spec: &PesSpec, coeffs: &Coefficients) -> [f64; 3] {
    let pes = Pes {
        spec: *spec,
        coeffs: *coeffs,
        quartic: spec.barrier_height / spec.saddle_x.powi(4),
    };
    let (gx, gy) = pes.gradient(spec.well_x, spec.well_y);
    [pes.potential(spec.well_x, spec.well_y) - spec.well_energy, gx, gy]
}

/// Solves the linear well conditions for `(A, B, C)`.
pub fn solve_coefficients(spec: &PesSpec) -> Result<Coefficients> {
    spec.validate()?;
    let PesSpec {
        barrier_height: vb,
        saddle_x: xs,
        vri_x: xi,
        well_x: xw,
        well_y: yw,
        well_energy: hw,
        ..
    } = *spec;
    let k = vb / xs.powi(4);
    let yw2 = yw * yw;
    let yw4 = yw2 * yw2;
    // rows: V = H_w, ∂V/∂x = 0, (∂V/∂y) / y_w = 0
    let a = [
        [yw2 * (xi - xw), yw4, xw * yw4],
        [-yw2, 0.0, yw4],
        [2.0 * (xi - xw), 4.0 * yw2, 4.0 * xw * yw2],
    ];
    let rhs = [
        hw - k * xw * xw * (xw * xw - 2.0 * xs * xs),
        -4.0 * k * xw * (xw * xw - xs * xs),
        0.0,
    ];
    let [ca, cb, cc] = solve3(a, rhs)?;
    Ok(Coefficients { a: ca, b: cb, c: cc })
}

/// A fully determined surface: validated spec plus solved coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pes {
    spec: PesSpec,
    coeffs: Coefficients,
    quartic: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalKind {
    Minimum,
    Index1Saddle,
    Maximum,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub energy: f64,
    pub kind: CriticalKind,
    /// Hessian eigenvalues, ascending.
    pub eigenvalues: [f64; 2],
    pub gradient_norm: f64,
}

/// Linearized spectrum at the origin saddle, closed form and numerical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleSpectrum {
    /// `λ₁,₂ = ±real_rate`.
    pub real_rate: f64,
    /// `λ₃,₄ = ±i·imag_freq`.
    pub imag_freq: f64,
    /// Eigenvalues of the 4x4 Jacobian as `(re, im)`, sorted by `(re, im)`.
    pub numeric: Vec<(f64, f64)>,
}

impl SaddleSpectrum {
    pub fn closed_form(&self) -> [(f64, f64); 4] {
        let mut v = [
            (-self.real_rate, 0.0),
            (0.0, -self.imag_freq),
            (0.0, self.imag_freq),
            (self.real_rate, 0.0),
        ];
        v.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        v
    }

    /// Largest componentwise gap between the closed form and the numerics.
    pub fn max_deviation(&self) -> f64 {
        self.closed_form()
            .iter()
            .zip(&self.numeric)
            .map(|(c, n)| (c.0 - n.0).abs().max((c.1 - n.1).abs()))
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym2_eigenvalues(h: [[f64; 2]; 2]) -> [f64; 2] {
    let mean = 0.5 * (h[0][0] + h[1][1]);
    let half_diff = 0.5 * (h[0][0] - h[1][1]);
    let r = half_diff.hypot(h[0][1]);
    [mean - r, mean + r]
}

impl Pes {
    pub fn new(spec: PesSpec) -> Result<Self> {
        let coeffs = solve_coefficients(&spec)?;
        Ok(Pes {
            spec,
            coeffs,
            quartic: spec.barrier_height / spec.saddle_x.powi(4),
        })
    }

    pub fn spec(&self) -> &PesSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    #[inline]
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        let Coefficients { a, b, c } = self.coeffs;
        let xs2 = self.spec.saddle_x * self.spec.saddle_x;
        let x2 = x * x;
        let y2 = y * y;
        self.quartic * x2 * (x2 - 2.0 * xs2) + a * y2 * (self.spec.vri_x - x) + y2 * y2 * (b + c * x)
    }

    /// `(∂V/∂x, ∂V/∂y)`.
    #[inline]
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let Coefficients { a, b, c } = self.coeffs;
        let xs2 = self.spec.saddle_x * self.spec.saddle_x;
        let y2 = y * y;
        let gx = 4.0 * self.quartic * x * (x * x - xs2) - a * y2 + c * y2 * y2;
        let gy = y * (2.0 * a * (self.spec.vri_x - x) + 4.0 * y2 * (b + c * x));
        (gx, gy)
    }

    pub fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let Coefficients { a, b, c } = self.coeffs;
        let xs2 = self.spec.saddle_x * self.spec.saddle_x;
        let y2 = y * y;
        let vxx = self.quartic * (12.0 * x * x - 4.0 * xs2);
        let vxy = y * (-2.0 * a + 4.0 * c * y2);
        let vyy = 2.0 * a * (self.spec.vri_x - x) + 12.0 * y2 * (b + c * x);
        [[vxx, vxy], [vxy, vyy]]
    }

    /// `(det Hess V, ∇Vᵀ adj(Hess V) ∇V)`; both vanish at a VRI point.
    pub fn vri_residuals(&self, x: f64, y: f64) -> (f64, f64) {
        let [[vxx, vxy], [_, vyy]] = self.hessian(x, y);
        let (gx, gy) = self.gradient(x, y);
        let det = vxx * vyy - vxy * vxy;
        let adj = vyy * gx * gx - 2.0 * vxy * gx * gy + vxx * gy * gy;
        (det, adj)
    }

    /// Locates the VRI point on the x-axis between the two saddles.
    ///
    /// `det Hess V(x, 0)` also vanishes where `V_xx = 0` (at `x_s/√3`), where
    /// the gradient is not orthogonal to the null direction. Every sign change
    /// of the determinant is refined and only roots satisfying the adjugate
    /// condition are kept.
    pub fn locate_vri(&self) -> Result<(f64, f64)> {
        let eps = tolerances::VRI_BRACKET_EPS;
        let lo = eps;
        let hi = self.spec.saddle_x - eps;
        let det = |x: f64| self.vri_residuals(x, 0.0).0;
        let adj_scale = {
            let (gx, _) = self.gradient(0.5 * self.spec.saddle_x, 0.0);
            gx * gx
        };
        roots::sign_change_brackets(det, lo, hi, 4096)
            .into_iter()
            .filter_map(|(a, b)| roots::bisect(det, a, b))
            .map(|x| self.polish_vri(x))
            .filter(|&x| {
                let (_, adj) = self.vri_residuals(x, 0.0);
                adj.abs() <= tolerances::ANALYTIC * adj_scale.max(1.0)
            })
            .min_by(|p, q| self.vri_residuals(*p, 0.0).1.abs().total_cmp(&self.vri_residuals(*q, 0.0).1.abs()))
            .map(|x| (x, 0.0))
            .ok_or(Error::VriNotBracketed { lo, hi })
    }

    /// Newton steps on `V_yy(x, 0)`, the determinant factor that carries the
    /// VRI root.
    fn polish_vri(&self, mut x: f64) -> f64 {
        for _ in 0..4 {
            let [_, [_, vyy]] = self.hessian(x, 0.0);
            let dvyy = -2.0 * self.coeffs.a;
            if dvyy == 0.0 {
                break;
            }
            let next = x - vyy / dvyy;
            if !next.is_finite() || (next - x).abs() > 1e-6 {
                break;
            }
            x = next;
        }
        x
    }

    fn newton_critical(&self, seed: (f64, f64)) -> Result<CriticalPoint> {
        let (mut x, mut y) = seed;
        let mut converged = false;
        for _ in 0..60 {
            let (gx, gy) = self.gradient(x, y);
            if gx.hypot(gy) <= 0.01 * tolerances::CRITICAL_GRADIENT {
                converged = true;
                break;
            }
            let [[a, b], [_, d]] = self.hessian(x, y);
            let det = a * d - b * b;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            let dx = (d * gx - b * gy) / det;
            let dy = (a * gy - b * gx) / det;
            x -= dx;
            y -= dy;
            if dx.hypot(dy) < 1e-15 * (1.0 + x.hypot(y)) {
                converged = true;
                break;
            }
        }
        let (gx, gy) = self.gradient(x, y);
        let gradient_norm = gx.hypot(gy);
        if !converged || !(gradient_norm <= tolerances::CRITICAL_GRADIENT) {
            return Err(Error::NewtonDiverged {
                seed_x: seed.0,
                seed_y: seed.1,
            });
        }
        let eigenvalues = sym2_eigenvalues(self.hessian(x, y));
        let kind = match (eigenvalues[0] > 0.0, eigenvalues[1] > 0.0) {
            _ if eigenvalues[0] == 0.0 || eigenvalues[1] == 0.0 => CriticalKind::Degenerate,
            (true, true) => CriticalKind::Minimum,
            (false, true) => CriticalKind::Index1Saddle,
            _ => CriticalKind::Maximum,
        };
        Ok(CriticalPoint {
            x,
            y,
            energy: self.potential(x, y),
            kind,
            eigenvalues,
            gradient_norm,
        })
    }

    /// Critical points refined by Newton from their designed locations: the
    /// high saddle `(0, 0)`, the low saddle `(x_s, 0)`, the product wells
    /// `(x_w, ±y_w)` and the reactant well `(−x_s, 0)`.
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint>> {
        let s = &self.spec;
        [
            (0.0, 0.0),
            (s.saddle_x, 0.0),
            (s.well_x, s.well_y),
            (s.well_x, -s.well_y),
            (-s.saddle_x, 0.0),
        ]
        .into_iter()
        .map(|seed| self.newton_critical(seed))
        .collect()
    }

    /// Jacobian of Hamilton's equations in `(x, y, p_x, p_y)` order.
    pub fn jacobian(&self, x: f64, y: f64) -> Matrix4<f64> {
        let [[vxx, vxy], [_, vyy]] = self.hessian(x, y);
        Matrix4::new(
            0.0, 0.0, 1.0 / self.spec.mass_x, 0.0,
            0.0, 0.0, 0.0, 1.0 / self.spec.mass_y,
            -vxx, -vxy, 0.0, 0.0,
            -vxy, -vyy, 0.0, 0.0,
        )
    }

    pub fn saddle_eigenvalues(&self) -> SaddleSpectrum {
        let s = &self.spec;
        let real_rate = 2.0 * s.barrier_height.sqrt() / (s.saddle_x * s.mass_x.sqrt());
        let imag_freq = (2.0 * self.coeffs.a * s.vri_x / s.mass_y).sqrt();
        let mut numeric: Vec<(f64, f64)> = self
            .jacobian(0.0, 0.0)
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect();
        numeric.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        SaddleSpectrum {
            real_rate,
            imag_freq,
            numeric,
        }
    }

    /// Width of the accessible channel along `x = 0` at energy `h0`.
    ///
    /// With `u = y²`, the turning points solve `B u² + A x_i u − H0 = 0`. The
    /// channel is bounded by the smallest positive root, written in the
    /// rationalized form `u = 2 H0 / (A x_i + √((A x_i)² + 4 B H0))`. For
    /// `B > 0` this is the only positive root; for `B < 0` (large `x_i`) the
    /// other root lies beyond the hump of `V(0, y)` and is not the bottleneck.
    pub fn bottleneck_width(&self, h0: f64) -> Result<f64> {
        if !(h0 > 0.0) {
            return Err(Error::Domain(format!("bottleneck width needs H0 > 0, got {h0}")));
        }
        let Coefficients { a, b, .. } = self.coeffs;
        let lin = a * self.spec.vri_x;
        let disc = lin * lin + 4.0 * b * h0;
        if !(lin > 0.0) || !(disc >= 0.0) {
            return Err(Error::Domain(format!(
                "no bounded channel on x = 0 at H0 = {h0} (A x_i = {lin}, B = {b})"
            )));
        }
        let u = 2.0 * h0 / (lin + disc.sqrt());
        Ok(2.0 * u.sqrt())
    }

    /// `2·y*` where `y* > 0` is the first solution of `V(0, y) = h0` moving
    /// out from the origin, found by scanning and bisection.
    pub fn bottleneck_width_by_root(&self, h0: f64) -> Result<f64> {
        if !(h0 > 0.0) {
            return Err(Error::Domain(format!("bottleneck width needs H0 > 0, got {h0}")));
        }
        let f = |y: f64| self.potential(0.0, y) - h0;
        let step = 1e-3;
        let mut lo = 0.0;
        for k in 1..=100_000 {
            let hi = k as f64 * step;
            if f(hi) > 0.0 {
                return roots::bisect(f, lo, hi)
                    .map(|y| 2.0 * y)
                    .ok_or_else(|| Error::Domain("no root of V(0, y) = H0".into()));
            }
            lo = hi;
        }
        Err(Error::Domain("V(0, y) does not reach H0".into()))
    }
}
