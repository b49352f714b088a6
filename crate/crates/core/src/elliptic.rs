//! Pressure computation.
//!
//! Two routes, used by different consumers:
//!
//! * [`solve_pressure_neumann`] inverts `(I - sigma^2 Laplacian)` on the
//!   bounded interval with a ghost-cell Neumann closure, in O(M) by
//!   tridiagonal elimination.  This drives the PDE stepper.
//! * [`convolve_halfline`] evaluates the exponential-kernel convolution
//!   `P = rho * U` for a profile supported on `(-inf, 0]`, by forward and
//!   backward exponential recursions with closed-form tail handling.  This
//!   drives the traveling-wave solver, where `P'(0)` sets the wave speed.

use crate::model::{Field, ModelParams};
use crate::{Error, Result};

/// Pressure and its derivative on a profile grid.
#[derive(Debug, Clone)]
pub struct PressurePair {
    /// `P(z_j)` at the profile nodes.
    pub p: Vec<f64>,
    /// `P'(z_j)` at the profile nodes.
    pub pprime: Vec<f64>,
    /// One-sided value `P'(0)`.
    pub pprime0: f64,
    /// Set when the truncation length is too short for the requested tail
    /// tolerance (`e^{-Z/sigma}` above `1e-14`).
    pub truncation_warning: bool,
}

/// Solve `(I - sigma^2 A) p = u` where `A` is the three-point Laplacian with
/// ghost-cell Neumann closure (`p_0 = p_1`, `p_{M+1} = p_M`).
///
/// The matrix is symmetric diagonally dominant, so the solution obeys the
/// maximum principle `min(u) <= p <= max(u)`.
pub fn solve_pressure_neumann(u: &Field, params: &ModelParams) -> Result<Field> {
    let m = u.grid.m;
    if m < 2 {
        return Err(Error::InvalidInput("pressure solve needs at least 2 cells".into()));
    }
    let s = params.sigma * params.sigma / (u.grid.dx * u.grid.dx);
    // Row i: -s p_{i-1} + (1 + 2s) p_i - s p_{i+1} = u_i, boundary rows 1 + s.
    let mut diag = vec![1.0 + 2.0 * s; m];
    diag[0] = 1.0 + s;
    diag[m - 1] = 1.0 + s;
    let p = thomas_symmetric(&diag, -s, &u.values);
    Field::new(u.grid, p, u.time)
}

/// Thomas elimination for a symmetric tridiagonal system with constant
/// off-diagonal `off` and main diagonal `diag`.
fn thomas_symmetric(diag: &[f64], off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n]; // modified upper diagonal
    let mut d = vec![0.0; n]; // modified rhs
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - off * c[i - 1];
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Face velocities `v_{i+1/2} = -chi (p_{i+1} - p_i) / dx` on the staggered
/// grid (`M + 1` faces).  The Neumann ghost cells zero the boundary faces.
pub fn staggered_velocity(p: &Field, chi: f64) -> Vec<f64> {
    let m = p.grid.m;
    let mut v = vec![0.0; m + 1];
    for i in 1..m {
        v[i] = -chi * (p.values[i] - p.values[i - 1]) / p.grid.dx;
    }
    v
}

/// Convolution `P = rho * U` for a profile sampled at `z_j = -(n - j) dz`
/// (last node at `z = 0`), extended by `tail_value` for `z < -Z` and by zero
/// for `z > 0`.
///
/// Returns `P`, `P'` and the one-sided `P'(0)`; all quantities are computed
/// in O(n) by exponential recursion of
/// `I_L(z) = (1/2sigma) int_{-inf}^z e^{(y-z)/sigma} U dy` and
/// `I_R(z) = (1/2sigma) int_z^0 e^{(z-y)/sigma} U dy`,
/// with `P = I_L + I_R` and `sigma P' = I_R - I_L`.  Panels integrate the
/// linear interpolant of `U` against the kernel exactly, so constants are
/// reproduced to round-off.
pub fn convolve_halfline(values: &[f64], dz: f64, tail_value: f64, sigma: f64) -> Result<PressurePair> {
    convolve_with_tails(values, dz, tail_value, 0.0, sigma)
}

/// As [`convolve_halfline`] but with an arbitrary constant right tail for
/// `z > 0`.  A profile constant on the whole line then yields `P` identically
/// equal to that constant.
pub fn convolve_with_tails(
    values: &[f64],
    dz: f64,
    left_tail: f64,
    right_tail: f64,
    sigma: f64,
) -> Result<PressurePair> {
    if values.len() < 2 {
        return Err(Error::InvalidInput("convolution needs at least 2 profile nodes".into()));
    }
    if !(dz > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("dz and sigma must be positive, got dz={dz}, sigma={sigma}")));
    }
    let n = values.len();
    let z_len = (n - 1) as f64 * dz;
    let truncation_warning = (-z_len / sigma).exp() > 1e-14;

    let h = dz / sigma;
    let decay = (-h).exp();
    // Exact kernel moments over one panel: for U linear on the panel with
    // value `u_near` at the node closest to the evaluation point and `u_far`
    // at the other end, the contribution is a*u_near + b*u_far.
    let w_total = (1.0 - decay) / 2.0;
    let w_far = (1.0 - decay * (1.0 + h)) / (2.0 * h);
    let w_near = w_total - w_far;

    // Forward sweep: I_L, including the constant left tail in closed form.
    let mut i_l = vec![0.0; n];
    i_l[0] = left_tail / 2.0;
    for j in 1..n {
        i_l[j] = decay * i_l[j - 1] + w_near * values[j] + w_far * values[j - 1];
    }
    // Backward sweep: I_R, with the right tail (zero on the half-line).
    let mut i_r = vec![0.0; n];
    i_r[n - 1] = right_tail / 2.0;
    for j in (0..n - 1).rev() {
        i_r[j] = decay * i_r[j + 1] + w_near * values[j] + w_far * values[j + 1];
    }

    let p: Vec<f64> = i_l.iter().zip(&i_r).map(|(l, r)| l + r).collect();
    let pprime: Vec<f64> = i_l.iter().zip(&i_r).map(|(l, r)| (r - l) / sigma).collect();
    let pprime0 = pprime[n - 1];
    Ok(PressurePair { p, pprime, pprime0, truncation_warning })
}
