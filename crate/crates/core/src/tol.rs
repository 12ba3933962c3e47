//! Shared numerical tolerances.

/// Unit-norm tolerance.
pub const EPS_NORM: f64 = 1e-8;
/// Agreement tolerance for finite-difference derivatives.
pub const EPS_FD: f64 = 1e-4;
/// Agreement tolerance when derivatives come from analytic closures.
pub const EPS_ANALYTIC: f64 = 1e-10;
/// Densities below this are degenerate: phase and log-derivatives are dropped there.
pub const EPS_P: f64 = 1e-12;
/// Largest basis dimension for which dense density-matrix traces are formed.
pub const TRACE_DIM_CAP: usize = 512;
/// Relative singular-value cutoff of the pseudo-inverse.
pub const SVD_CUTOFF: f64 = 1e-10;
/// Exceptional-point tolerance, relative to the spectral radius.
pub const EP_TOL: f64 = 1e-8;
