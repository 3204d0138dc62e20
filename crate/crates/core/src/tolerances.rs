//! Numerical tolerances shared by the solvers and their self-checks.

/// Analytic identities: VRI location, saddle spectrum, bottleneck width.
pub const ANALYTIC: f64 = 1e-10;

/// Residuals of the coefficient linear system.
pub const LINEAR_RESIDUAL: f64 = 1e-12;

/// Relative agreement of analytic derivatives with central differences.
pub const FINITE_DIFFERENCE: f64 = 1e-6;

/// Step used for the central-difference checks.
pub const FD_STEP: f64 = 1e-5;

/// Gradient norm accepted at a critical point.
pub const CRITICAL_GRADIENT: f64 = 1e-10;

/// Event-function residual at a localized exit state.
pub const EVENT_SURFACE: f64 = 1e-10;

/// Energy-shell residual of constructed initial conditions.
pub const ENERGY_SHELL: f64 = 1e-14;

/// Energy drift allowed along any trajectory at default adaptive tolerances.
pub const ENERGY_DRIFT: f64 = 1e-9;

/// Relative accuracy of the slice-area quadrature.
pub const QUADRATURE_REL: f64 = 1e-10;

/// Offset from the interval ends when bracketing the VRI root.
pub const VRI_BRACKET_EPS: f64 = 1e-6;

/// Distance past the saddle line a trajectory must reach before a return
/// across `x = 0` counts as a recrossing.
pub const X_ENTRY_MIN: f64 = 1e-3;
