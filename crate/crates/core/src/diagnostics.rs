//! Front tracking and measurement: level sets, separatrix, jump height,
//! propagation speeds and gap-decay fits.

use std::io::Write as _;
use std::path::Path;

use crate::elliptic::staggered_velocity;
use crate::model::{Field, Grid1D};
use crate::travelingwave::WaveProfile;
use crate::{Error, Result};

/// Time series of front diagnostics accumulated along a run.
#[derive(Debug, Clone)]
pub struct LevelSetTrace {
    /// Tracked levels `beta`; `beta = 0` means the support front.
    pub levels: Vec<f64>,
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub separatrix: Vec<f64>,
    pub jump: Vec<f64>,
    /// One row per sample time, one column per level.
    pub xi: Vec<Vec<f64>>,
}

impl LevelSetTrace {
    pub fn new(levels: Vec<f64>) -> Self {
        LevelSetTrace {
            levels,
            times: vec![],
            mass: vec![],
            separatrix: vec![],
            jump: vec![],
            xi: vec![],
        }
    }

    pub fn push(&mut self, t: f64, mass: f64, separatrix: f64, jump: f64, xi: Vec<f64>) {
        debug_assert_eq!(xi.len(), self.levels.len());
        self.times.push(t);
        self.mass.push(mass);
        self.separatrix.push(separatrix);
        self.jump.push(jump);
        self.xi.push(xi);
    }

    /// Column index of a tracked level.
    pub fn level_index(&self, beta: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|&b| (b - beta).abs() < 1e-9)
            .ok_or_else(|| Error::InvalidInput(format!("level beta = {beta} is not tracked")))
    }

    /// `xi(t, beta)` with linear interpolation between sample times.
    pub fn xi_at(&self, beta: f64, t: f64) -> Result<f64> {
        let col = self.level_index(beta)?;
        interp_series(&self.times, |i| self.xi[i][col], t)
    }

    /// `h*(t)` with linear interpolation between sample times.
    pub fn separatrix_at(&self, t: f64) -> Result<f64> {
        interp_series(&self.times, |i| self.separatrix[i], t)
    }

    /// Write `trace.csv`: `t,mass,separatrix,jump,xi_<beta>,...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(f, "t,mass,separatrix,jump")?;
        for beta in &self.levels {
            write!(f, ",xi_{beta:.4}")?;
        }
        writeln!(f)?;
        for i in 0..self.times.len() {
            write!(
                f,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.mass[i], self.separatrix[i], self.jump[i]
            )?;
            for &x in &self.xi[i] {
                write!(f, ",{x:.16e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn interp_series(times: &[f64], value: impl Fn(usize) -> f64, t: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidInput("empty trace".into()));
    }
    let eps = 1e-9;
    if t < times[0] - eps || t > times[times.len() - 1] + eps {
        return Err(Error::InvalidInput(format!("time {t} outside sampled range")));
    }
    match times.iter().position(|&s| s >= t - eps) {
        Some(0) => Ok(value(0)),
        Some(j) => {
            let (t0, t1) = (times[j - 1], times[j]);
            let w = (t - t0) / (t1 - t0);
            Ok(value(j - 1) * (1.0 - w) + value(j) * w)
        }
        None => Ok(value(times.len() - 1)),
    }
}

/// Rightmost crossing of level `beta`: largest `i` with `u_i >= beta` and
/// `u_{i+1} < beta`, linearly interpolated between cell centers.  `None` if
/// `u < beta` everywhere; the last cell center if the level never drops.
pub fn level_set(u: &Field, beta: f64) -> Option<f64> {
    let v = &u.values;
    let m = v.len();
    if v[m - 1] >= beta {
        return Some(u.grid.center(m - 1));
    }
    for i in (0..m - 1).rev() {
        if v[i] >= beta && v[i + 1] < beta {
            let frac = (v[i] - beta) / (v[i] - v[i + 1]);
            return Some(u.grid.center(i) + frac * u.grid.dx);
        }
    }
    None
}

/// Support front: rightmost cell center with `u > threshold`, plus `dx/2`.
/// Returns `-L` for an empty support.
pub fn front_zero(u: &Field, threshold: f64) -> f64 {
    match u.values.iter().rposition(|&v| v > threshold) {
        Some(i) => u.grid.center(i) + u.grid.dx / 2.0,
        None => -u.grid.l,
    }
}

/// Average front speed of level `beta` between `t1` and `t2`
/// (positions interpolated if the times fall between samples).
pub fn propagation_speed(trace: &LevelSetTrace, beta: f64, t1: f64, t2: f64) -> Result<f64> {
    if t1 >= t2 {
        return Err(Error::InvalidInput(format!("need t1 < t2, got {t1} >= {t2}")));
    }
    let x1 = trace.xi_at(beta, t1)?;
    let x2 = trace.xi_at(beta, t2)?;
    Ok((x2 - x1) / (t2 - t1))
}

/// Height of the front: maximum of `u` over the `k` cells immediately left
/// of `front`.  `None` when the front sits at the right domain boundary
/// (the estimate would be meaningless there); `0` for empty support.
pub fn jump_height(u: &Field, front: f64, k: usize) -> Option<f64> {
    let grid = &u.grid;
    if front >= grid.l - grid.dx / 2.0 {
        return None;
    }
    // cells with centers at or left of the front
    let last = ((front + grid.l) / grid.dx).floor() as isize;
    let last = last.min(grid.m as isize - 1);
    if last < 0 {
        return Some(0.0);
    }
    let first = (last + 1 - k as isize).max(0) as usize;
    Some(
        u.values[first..=last as usize]
            .iter()
            .fold(0.0, |a, &b| a.max(b)),
    )
}

/// Exponential fit of the gap `h*(t) - xi(t, beta)`.
#[derive(Debug, Clone, Copy)]
pub struct GapFit {
    /// Least-squares slope of `log(gap)` versus `t`.
    pub rate: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub residual: f64,
    /// True if the window was cut short because the gap fell below `dx`.
    pub restricted: bool,
}

/// Fit an exponential decay rate to the separatrix / level-set gap over the
/// sampled times in `[t_start, t_end]`.  Samples where the gap has collapsed
/// below `dx` (resolved to the grid) are dropped from the fit.
pub fn gap_decay(trace: &LevelSetTrace, beta: f64, t_start: f64, t_end: f64, dx: f64) -> Result<GapFit> {
    let col = trace.level_index(beta)?;
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    let mut restricted = false;
    for i in 0..trace.times.len() {
        let t = trace.times[i];
        if t < t_start - 1e-9 || t > t_end + 1e-9 {
            continue;
        }
        let gap = trace.separatrix[i] - trace.xi[i][col];
        if !gap.is_finite() || gap <= dx {
            if !ts.is_empty() {
                restricted = true;
                break; // keep the earlier contiguous window
            }
            continue;
        }
        ts.push(t);
        logs.push(gap.ln());
    }
    if ts.len() < 2 {
        return Err(Error::InvalidInput(
            "gap resolved to the grid over the whole window; nothing to fit".into(),
        ));
    }
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let lm = logs.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&t, &l) in ts.iter().zip(&logs) {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (l - lm);
    }
    let rate = sxy / sxx;
    let mut ss = 0.0;
    for (&t, &l) in ts.iter().zip(&logs) {
        let e = l - (lm + rate * (t - tm));
        ss += e * e;
    }
    Ok(GapFit { rate, residual: (ss / n).sqrt(), restricted })
}

/// Separatrix integrator: follows the rightmost characteristic
/// `dh/dt = -chi (d_x p)(t, h)` with the discrete pressure gradient,
/// by the explicit midpoint rule synchronized with the PDE steps.
#[derive(Debug, Clone)]
pub struct SeparatrixTracker {
    h: f64,
}

impl SeparatrixTracker {
    pub fn new(h0: f64) -> Self {
        SeparatrixTracker { h: h0 }
    }

    pub fn position(&self) -> f64 {
        self.h
    }

    /// Advance by `dt` using the pressure frozen over the step; returns the
    /// midpoint velocity actually used.
    pub fn advance(&mut self, p: &Field, chi: f64, dt: f64, grid: &Grid1D) -> Result<f64> {
        let faces = staggered_velocity(p, chi);
        let v = |x: f64| face_interp(&faces, grid, x);
        let v1 = v(self.h);
        let v2 = v(self.h + 0.5 * dt * v1);
        let h_new = self.h + dt * v2;
        // The interpolated velocity vanishes at the boundary faces, so the
        // characteristic can never formally cross them; entering the outer
        // cell already means the domain is too small to keep tracking.  A
        // tracker seeded in that region (full-support data) is left alone.
        let edge = grid.l - grid.dx;
        if (h_new > edge && self.h <= edge) || (h_new < -edge && self.h >= -edge) {
            return Err(Error::DomainExit { time: p.time + dt });
        }
        self.h = h_new;
        Ok(v2)
    }
}

/// Linear interpolation of face-centered velocities at an arbitrary point.
fn face_interp(faces: &[f64], grid: &Grid1D, x: f64) -> f64 {
    let s = ((x + grid.l) / grid.dx).clamp(0.0, (grid.m as f64) - 1e-12);
    let i = s.floor() as usize;
    let frac = s - i as f64;
    faces[i] * (1.0 - frac) + faces[i + 1] * frac
}

/// Check the strict speed inequality `-chi P'(z) < c` at every profile node.
/// Returns the verdict and the minimum margin `c + chi P'(z)`.
pub fn smooth_speed_check(profile: &WaveProfile, chi: f64) -> (bool, f64) {
    let mut margin = f64::INFINITY;
    for &pp in &profile.pprime {
        margin = margin.min(profile.c + chi * pp);
    }
    (margin > 0.0, margin)
}

/// Sup distance between a computed field and a sharp profile after aligning
/// the profile's discontinuity to the field's half-jump level set.  Cells
/// within `exclude_cells` of the alignment point are skipped (the upwind
/// scheme smears the jump over a few cells).  `None` if no alignment level
/// crossing exists.
pub fn aligned_sup_distance(
    u: &Field,
    z: &[f64],
    uprof: &[f64],
    u0minus: f64,
    exclude_cells: usize,
) -> Option<f64> {
    let x0 = level_set(u, u0minus / 2.0)?;
    let dx = u.grid.dx;
    let mut sup: f64 = 0.0;
    for i in 0..u.grid.m {
        let zi = u.grid.center(i) - x0;
        if zi.abs() <= exclude_cells as f64 * dx {
            continue;
        }
        let pref = profile_eval(z, uprof, zi);
        sup = sup.max((u.values[i] - pref).abs());
    }
    Some(sup)
}

/// Piecewise-linear evaluation of a profile given on nodes `z` (ending at 0),
/// extended by its left value below the grid and by 0 for `z >= 0`.
fn profile_eval(z: &[f64], uprof: &[f64], zi: f64) -> f64 {
    if zi >= 0.0 {
        return 0.0;
    }
    if zi <= z[0] {
        return uprof[0];
    }
    let dz = z[1] - z[0];
    let s = (zi - z[0]) / dz;
    let j = (s.floor() as usize).min(z.len() - 2);
    let frac = s - j as f64;
    uprof[j] * (1.0 - frac) + uprof[j + 1] * frac
}
