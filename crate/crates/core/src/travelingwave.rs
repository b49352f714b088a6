//! Construction of the sharp discontinuous traveling wave.
//!
//! The profile `U` lives on `(-inf, 0]`, is nonincreasing with
//! `2/(2 + chi_hat) <= U <= 1`, vanishes for `z > 0`, and is obtained as a
//! fixed point of a profile operator `T`.  Two independent realizations of
//! `T` are provided behind [`ProfileOperator`]:
//!
//! * [`OdeRoute`] integrates the profile ODE in `z` directly, seeding the
//!   singular node `z = 0` with the exact boundary value and the L'Hopital
//!   limit of the derivative;
//! * [`TauRoute`] integrates the characteristic time parametrization
//!   `(tau(t), U(t))` and resamples onto the `z` grid.
//!
//! Both must agree to integrator tolerance; the cross-check is part of the
//! test suite.  The wave speed is `c = -chi P'(0)`, verified against an
//! independent quadrature of the speed integral.

use std::io::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use crate::elliptic::{PressurePair, convolve_halfline};
use crate::model::{ModelParams, norm_eta};
use crate::{Error, Result};

/// A converged (or candidate) sharp wave profile on `[-Z, 0]`.
#[derive(Debug, Clone)]
pub struct WaveProfile {
    /// Nodes `z_j = -Z + j dz`, the last one at `z = 0`.
    pub z: Vec<f64>,
    /// Profile values; `u[last]` is the one-sided limit `U(0^-)`.
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub pprime: Vec<f64>,
    /// Wave speed `-chi P'(0)`.
    pub c: f64,
    pub u0minus: f64,
    pub iterations: usize,
    /// Weighted-norm distance between the last two iterates.
    pub residual_eta: f64,
}

/// Solver options for the fixed-point construction.
#[derive(Debug, Clone)]
pub struct WaveOptions {
    pub dz: f64,
    /// Truncation length `Z`; the profile is extended by 1 to the left.
    pub z_len: f64,
    /// Stopping tolerance in the weighted norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight parameter of the stopping norm, in `(0, 1/sigma)`.
    pub eta: f64,
    pub route: Route,
}

impl WaveOptions {
    pub fn for_params(params: &ModelParams) -> Self {
        WaveOptions {
            dz: 2e-3,
            z_len: 40.0 * params.sigma,
            tol: 1e-10,
            max_iter: 400,
            eta: 1.0 / (2.0 * params.sigma),
            route: Route::Ode,
        }
    }
}

/// Which realization of the profile operator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Ode,
    Tau,
}

impl Route {
    pub fn operator(self) -> &'static dyn ProfileOperator {
        match self {
            Route::Ode => &OdeRoute,
            Route::Tau => &TauRoute,
        }
    }

    pub fn from_name(name: &str) -> Result<Route> {
        match name {
            "ode" => Ok(Route::Ode),
            "tau" => Ok(Route::Tau),
            other => Err(Error::Config(format!(
                "unknown wave route {other:?} (expected \"ode\" or \"tau\")"
            ))),
        }
    }
}

/// One application of the profile operator on a uniform grid ending at
/// `z = 0`.  Input and output are node values of admissible profiles.
pub trait ProfileOperator: Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, u: &[f64], dz: f64, params: &ModelParams) -> Result<Vec<f64>>;
}

/// Direct integration of the profile ODE in `z`.
pub struct OdeRoute;

/// Characteristic-time integration and resampling.
pub struct TauRoute;

impl ProfileOperator for OdeRoute {
    fn name(&self) -> &'static str {
        "ode"
    }
    fn apply(&self, u: &[f64], dz: f64, params: &ModelParams) -> Result<Vec<f64>> {
        apply_t_ode(u, dz, params)
    }
}

impl ProfileOperator for TauRoute {
    fn name(&self) -> &'static str {
        "tau"
    }
    fn apply(&self, u: &[f64], dz: f64, params: &ModelParams) -> Result<Vec<f64>> {
        apply_t_tau(u, dz, params)
    }
}

/// Admissibility: values in `[2/(2+chi_hat), 1]` and nonincreasing, within
/// `1e-12` slack.  Returns the verdict and a description of the first
/// violation if any.
pub fn is_admissible(u: &[f64], chi_hat: f64) -> (bool, Option<String>) {
    const TOL: f64 = 1e-12;
    let lower = 2.0 / (2.0 + chi_hat);
    for (j, &v) in u.iter().enumerate() {
        if v < lower - TOL || v > 1.0 + TOL {
            return (false, Some(format!("node {j}: value {v} outside [{lower}, 1]")));
        }
    }
    for j in 0..u.len() - 1 {
        if u[j + 1] > u[j] + TOL {
            return (
                false,
                Some(format!("nodes {j}..{}: increasing pair {} -> {}", j + 1, u[j], u[j + 1])),
            );
        }
    }
    (true, None)
}

/// Apply `T` by integrating the profile ODE
/// `V'(z) = V (1 + chi_hat P - (1+chi_hat) V) / (chi (P'(0) - P'(z)))`
/// backward from `z = 0` with a classical fourth-order one-step method.
///
/// The boundary node carries the exact value `(1 + chi_hat P(0))/(1+chi_hat)`
/// and the first stage uses the L'Hopital limit of `V'` at `0^-`, where the
/// ODE is 0/0.  Half-step pressure values come from the convolution on a
/// twice-refined grid (exact for the piecewise-linear profile, so they are
/// consistent with the coarse values to round-off).
pub fn apply_t_ode(u: &[f64], dz: f64, params: &ModelParams) -> Result<Vec<f64>> {
    let n = u.len() - 1;
    let chi_hat = params.chi_hat;
    let chi = params.chi;

    // refine the piecewise-linear profile to get half-node pressures
    let mut fine = Vec::with_capacity(2 * n + 1);
    for j in 0..n {
        fine.push(u[j]);
        fine.push(0.5 * (u[j] + u[j + 1]));
    }
    fine.push(u[n]);
    let pair = convolve_halfline(&fine, dz / 2.0, 1.0, params.sigma)?;
    let p = &pair.p;
    let pp = &pair.pprime;
    let pprime0 = pair.pprime0;

    // regular right-hand side at fine node k
    let g = |k: usize, val: f64| -> Result<f64> {
        let denom = chi * (pprime0 - pp[k]);
        if denom.abs() < 1e-14 {
            return Err(Error::Singularity { z: -((2 * n - k) as f64) * dz / 2.0 });
        }
        Ok(val * (1.0 + chi_hat * p[k] - (1.0 + chi_hat) * val) / denom)
    };

    let mut v = vec![0.0; n + 1];
    v[n] = (1.0 + chi_hat * p[2 * n]) / (1.0 + chi_hat);
    let lhopital =
        pprime0 * (1.0 + chi_hat * p[2 * n]) / ((1.0 + chi_hat) * (1.0 + chi_hat * u[n]));

    let h = -dz;
    for j in (0..n).rev() {
        let v1 = v[j + 1];
        let k1 = if j + 1 == n { lhopital } else { g(2 * (j + 1), v1)? };
        let k2 = g(2 * j + 1, v1 + 0.5 * h * k1)?;
        let k3 = g(2 * j + 1, v1 + 0.5 * h * k2)?;
        let k4 = g(2 * j, v1 + h * k3)?;
        v[j] = v1 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    Ok(v)
}

/// Cubic Hermite interpolant on the uniform profile grid, extended by its
/// end values outside `[-Z, 0]`.
struct Hermite<'a> {
    z0: f64,
    dz: f64,
    vals: &'a [f64],
    derivs: &'a [f64],
}

impl Hermite<'_> {
    fn eval(&self, z: f64) -> f64 {
        let n = self.vals.len() - 1;
        let s = ((z - self.z0) / self.dz).clamp(0.0, n as f64);
        let j = (s.floor() as usize).min(n - 1);
        let t = s - j as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.vals[j]
            + h10 * self.dz * self.derivs[j]
            + h01 * self.vals[j + 1]
            + h11 * self.dz * self.derivs[j + 1]
    }
}

/// Apply `T` through the characteristic-time route: solve
/// `tau'(t) = chi (P'(0) - P'(tau))` and
/// `U'(t) = U (1 + chi_hat P(tau) - (1+chi_hat) U)` as a coupled system and
/// resample `U(tau^{-1}(z))` onto the grid.
///
/// `tau` decreases from `0^-` to `-inf`; the asymptotic value
/// `(1 + chi_hat P(0))/(1+chi_hat)` is imposed at `tau = -delta` with tiny
/// `delta` (the equilibrium is attracting forward in `t`, so the `O(delta)`
/// seeding error decays along the integration).
pub fn apply_t_tau(u: &[f64], dz: f64, params: &ModelParams) -> Result<Vec<f64>> {
    let n = u.len() - 1;
    let pair = convolve_halfline(u, dz, 1.0, params.sigma)?;
    let z0 = -(n as f64) * dz;
    let sigma2 = params.sigma * params.sigma;
    // P'' = (P - U)/sigma^2 from the resolvent identity
    let psecond: Vec<f64> = pair.p.iter().zip(u).map(|(pv, uv)| (pv - uv) / sigma2).collect();
    let p_of = Hermite { z0, dz, vals: &pair.p, derivs: &pair.pprime };
    let pp_of = Hermite { z0, dz, vals: &pair.pprime, derivs: &psecond };
    let pprime0 = pair.pprime0;
    let chi = params.chi;

    let u_init = (1.0 + params.chi_hat * pair.p[n]) / (1.0 + params.chi_hat);
    integrate_tau(
        n,
        dz,
        params,
        |tau| p_of.eval(tau),
        |tau| chi * (pprime0 - pp_of.eval(tau)),
        u_init,
    )
}

/// Shared integrator of the `(tau, U)` system; `u_pressure` supplies
/// `P(tau)` for the logistic-type equation and `tau_speed` the (negative)
/// characteristic speed.  Kept separate so tests can force a constant
/// pressure and a synthetic sweep speed.
fn integrate_tau(
    n: usize,
    dz: f64,
    params: &ModelParams,
    u_pressure: impl Fn(f64) -> f64,
    tau_speed: impl Fn(f64) -> f64,
    u_init: f64,
) -> Result<Vec<f64>> {
    let chi_hat = params.chi_hat;
    let z_end = -(n as f64) * dz - dz; // integrate one node past -Z
    let delta = 1e-7 * params.sigma;

    let rhs = |tau: f64, uu: f64| -> (f64, f64) {
        (tau_speed(tau), uu * (1.0 + chi_hat * u_pressure(tau) - (1.0 + chi_hat) * uu))
    };

    let mut tau = -delta;
    let mut uu = u_init;
    let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(4 * n); // (tau, U, dU/dtau)
    let push = |samples: &mut Vec<(f64, f64, f64)>, tau: f64, uu: f64| {
        let (td, ud) = rhs(tau, uu);
        let slope = if td.abs() > 1e-300 { ud / td } else { 0.0 };
        samples.push((tau, uu, slope));
    };
    push(&mut samples, tau, uu);

    let max_steps = 400_000 + 40 * n;
    for _ in 0..max_steps {
        if tau <= z_end {
            break;
        }
        let s = tau_speed(tau);
        if s >= 0.0 {
            return Err(Error::Singularity { z: tau });
        }
        let dt = (0.4 * dz / s.abs()).min(0.02);
        let (k1t, k1u) = rhs(tau, uu);
        let (k2t, k2u) = rhs(tau + 0.5 * dt * k1t, uu + 0.5 * dt * k1u);
        let (k3t, k3u) = rhs(tau + 0.5 * dt * k2t, uu + 0.5 * dt * k2u);
        let (k4t, k4u) = rhs(tau + dt * k3t, uu + dt * k3u);
        tau += dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        uu += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        push(&mut samples, tau, uu);
    }
    if tau > z_end {
        return Err(Error::Inconsistency(format!(
            "characteristic-time integration stalled at tau = {tau}"
        )));
    }

    // resample onto z_j = -(n - j) dz by monotone Hermite interpolation in tau
    let mut v = vec![0.0; n + 1];
    v[n] = u_init;
    let mut k = 0;
    for j in (0..n).rev() {
        let zj = -((n - j) as f64) * dz;
        while k + 1 < samples.len() && samples[k + 1].0 > zj {
            k += 1;
        }
        let (b, fb, db) = samples[k];
        let (a, fa, da) = samples[k + 1]; // a < zj <= b
        let hseg = b - a;
        let t = ((zj - a) / hseg).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        v[j] = (2.0 * t3 - 3.0 * t2 + 1.0) * fa
            + (t3 - 2.0 * t2 + t) * hseg * da
            + (-2.0 * t3 + 3.0 * t2) * fb
            + (t3 - t2) * hseg * db;
    }
    Ok(v)
}

/// Fixed-point construction: iterate `U <- T(U)` from the Heaviside profile
/// `U = 1` until the weighted-norm increment drops below `opts.tol`.
///
/// If an iterate drifts out of the admissible set by more than `1e-8`
/// (accumulated quadrature error), it is clamped to the bounds and
/// re-monotonized before continuing.
pub fn fixed_point(params: &ModelParams, opts: &WaveOptions) -> Result<WaveProfile> {
    if !(opts.dz > 0.0 && opts.z_len > opts.dz) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < dz < Z, got dz={}, Z={}",
            opts.dz, opts.z_len
        )));
    }
    let n = (opts.z_len / opts.dz).round() as usize;
    let dz = opts.z_len / n as f64;
    let z: Vec<f64> = (0..=n).map(|j| -((n - j) as f64) * dz).collect();
    let op = opts.route.operator();

    let mut u = vec![1.0; n + 1];
    let mut residuals = Vec::new();
    for it in 1..=opts.max_iter {
        let mut v = op.apply(&u, dz, params)?;
        if v.iter().any(|x| !x.is_finite()) {
            // NaN would sail through every later comparison, so stop here
            return Err(Error::Inconsistency(format!(
                "profile operator produced non-finite values at iteration {it}"
            )));
        }
        project_admissible(&mut v, params.chi_hat);
        let diff: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a - b).collect();
        let res = norm_eta(&z, &diff, opts.eta, params.sigma)?;
        residuals.push(res);
        u = v;
        if res < opts.tol {
            return finish_profile(z, u, it, res, params);
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        last_residual: *residuals.last().unwrap_or(&f64::NAN),
        residual_history: residuals,
    })
}

/// Clamp to the admissible bounds and restore monotonicity by a running max
/// from the right.  Returns the largest correction applied.
fn project_admissible(u: &mut [f64], chi_hat: f64) -> f64 {
    let lower = 2.0 / (2.0 + chi_hat);
    let mut worst: f64 = 0.0;
    for v in u.iter_mut() {
        let c = v.clamp(lower, 1.0);
        worst = worst.max((c - *v).abs());
        *v = c;
    }
    for j in (0..u.len() - 1).rev() {
        if u[j] < u[j + 1] {
            worst = worst.max(u[j + 1] - u[j]);
            u[j] = u[j + 1];
        }
    }
    if worst > 1e-8 {
        eprintln!("warning: iterate projected back onto the admissible set (distance {worst:.3e})");
    }
    worst
}

fn finish_profile(
    z: Vec<f64>,
    u: Vec<f64>,
    iterations: usize,
    residual_eta: f64,
    params: &ModelParams,
) -> Result<WaveProfile> {
    let n = u.len() - 1;
    let dz = z[1] - z[0];
    let pair: PressurePair = convolve_halfline(&u, dz, 1.0, params.sigma)?;
    let c = -params.chi * pair.pprime0;
    let u0minus = u[n];

    let (ok, violation) = is_admissible(&u, params.chi_hat);
    if !ok {
        return Err(Error::Inconsistency(format!(
            "converged profile not admissible: {}",
            violation.unwrap_or_default()
        )));
    }
    let boundary = (1.0 + params.chi_hat * pair.p[n]) / (1.0 + params.chi_hat);
    if (u0minus - boundary).abs() > 1e-8 {
        return Err(Error::Inconsistency(format!(
            "boundary value {u0minus} disagrees with (1 + chi_hat P(0))/(1 + chi_hat) = {boundary}"
        )));
    }
    let (lo, hi) = speed_interval(params);
    if c < lo - 1e-8 || c > hi + 1e-8 {
        return Err(Error::Inconsistency(format!(
            "wave speed {c} outside admissible interval ({lo}, {hi})"
        )));
    }

    let profile = WaveProfile {
        z,
        u,
        p: pair.p,
        pprime: pair.pprime,
        c,
        u0minus,
        iterations,
        residual_eta,
    };
    // cross-check against the speed integral
    wave_speed(&profile, params)?;
    Ok(profile)
}

/// Admissible speed interval `(sigma chi_hat/(2 + chi_hat), sigma chi_hat/2)`.
pub fn speed_interval(params: &ModelParams) -> (f64, f64) {
    (
        params.sigma * params.chi_hat / (2.0 + params.chi_hat),
        params.sigma * params.chi_hat / 2.0,
    )
}

/// Wave speed `-chi P'(0)`, verified against the independent quadrature
/// `(chi/(2 sigma^2)) int_{-inf}^0 e^{y/sigma} U dy` (exact per-panel
/// integration of the piecewise-linear profile, plus the left-tail term).
/// The two must agree to `1e-10`.
pub fn wave_speed(profile: &WaveProfile, params: &ModelParams) -> Result<f64> {
    let c = -params.chi * profile.pprime[profile.pprime.len() - 1];
    let dz = profile.z[1] - profile.z[0];
    let quad = speed_from_quadrature(&profile.u, dz, 1.0, params);
    if (c - quad).abs() > 1e-10 {
        return Err(Error::Inconsistency(format!(
            "speed mismatch: -chi P'(0) = {c} vs quadrature {quad}"
        )));
    }
    Ok(c)
}

/// Speed integral `(chi/(2 sigma^2)) int_{-inf}^0 e^{y/sigma} U dy` for a
/// profile sampled on `[-Z, 0]` and extended by `tail` to the left.
pub fn speed_from_quadrature(u: &[f64], dz: f64, tail: f64, params: &ModelParams) -> f64 {
    let n = u.len() - 1;
    let sigma = params.sigma;
    let z_len = n as f64 * dz;
    // closed-form tail: int_{-inf}^{-Z} e^{y/sigma} tail dy
    let mut total = sigma * (-z_len / sigma).exp() * tail;
    for j in 0..n {
        let a = -z_len + j as f64 * dz;
        let b = a + dz;
        let (ea, eb) = ((a / sigma).exp(), (b / sigma).exp());
        // exact integral of the linear panel against e^{y/sigma}
        let slope = (u[j + 1] - u[j]) / dz;
        total += u[j] * sigma * (eb - ea) + slope * (sigma * dz * eb - sigma * sigma * (eb - ea));
    }
    params.chi / (2.0 * sigma * sigma) * total
}

/// Explicit porous-medium-limit profile `(1 - e^{z/sqrt 2})_+`.
pub fn porous_medium_profile(z: f64) -> f64 {
    (1.0 - (z / std::f64::consts::SQRT_2).exp()).max(0.0)
}

/// `f(x) = ln((2-x)/x) + (2/(2+x)) ((x/2) ln(x/2) + 1 - x/2)` on `(0, 2)`;
/// strictly decreasing, with a unique root defining the critical repulsion
/// strength.
pub fn f_appendix(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 2.0) {
        return Err(Error::InvalidParameter(format!("f is defined on (0, 2), got {x}")));
    }
    let half = x / 2.0;
    Ok(((2.0 - x) / x).ln() + 2.0 / (2.0 + x) * (half * half.ln() + 1.0 - half))
}

/// Root of [`f_appendix`] by bisection; the bracket `(0, 2)` is guaranteed
/// by the limits `f(0^+) = +inf`, `f(2^-) = -inf` and strict monotonicity.
pub fn find_chibar(tol: f64) -> f64 {
    let mut lo = 1e-9;
    let mut hi = 2.0 - 1e-9;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f_appendix(mid).unwrap() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cached critical threshold.
pub fn chibar() -> f64 {
    static CHIBAR: OnceLock<f64> = OnceLock::new();
    *CHIBAR.get_or_init(|| find_chibar(1e-12))
}

/// Write the profile as CSV: `z,U,P,Pprime`.
pub fn write_profile_csv(profile: &WaveProfile, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "z,U,P,Pprime")?;
    for j in 0..profile.z.len() {
        writeln!(
            f,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            profile.z[j], profile.u[j], profile.p[j], profile.pprime[j]
        )?;
    }
    Ok(())
}

/// Write the metadata sidecar (`key=value` lines).
pub fn write_profile_meta(profile: &WaveProfile, params: &ModelParams, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "c={:.16e}", profile.c)?;
    writeln!(f, "U0minus={:.16e}", profile.u0minus)?;
    writeln!(f, "iterations={}", profile.iterations)?;
    writeln!(f, "residual_eta={:.16e}", profile.residual_eta)?;
    writeln!(f, "chi_hat={:.16e}", params.chi_hat)?;
    writeln!(f, "chibar={:.16e}", chibar())?;
    Ok(())
}
