use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::least_squares;

/// `f(x) = a x² + b x + c` fitted by ordinary least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub residuals: Vec<f64>,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn sum_squares(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }
}

/// Least-squares parabola through `(xs, ys)` via Householder QR on the
/// Vandermonde design. Residuals are `y − f(x)`; `R² = 1 − SS_res/SS_tot`.
pub fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Result<QuadraticFit> {
    if xs.len() != ys.len() {
        return Err(Error::Validation(format!(
            "fit needs equal lengths, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::RankDeficient);
    }
    let design: Vec<f64> = xs.iter().flat_map(|&x| [x * x, x, 1.0]).collect();
    let coef = least_squares(&design, 3, ys)?;
    let mut fit = QuadraticFit {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        r2: 0.0,
        residuals: Vec::new(),
    };
    fit.residuals = xs.iter().zip(ys).map(|(&x, &y)| y - fit.eval(x)).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res = fit.sum_squares();
    fit.r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(fit)
}
