//! Domain types shared by all solver modules: model parameters, the uniform
//! cell-centered grid, solution fields, initial conditions, the exponential
//! kernel and the weighted profile norm.

use crate::travelingwave::chibar;
use crate::{Error, Result};

/// Model parameters of the repulsion model.
///
/// `chi_hat = chi / sigma^2` is the effective repulsion strength: it governs
/// the asymptotic jump height `2 / (2 + chi_hat)` and the admissible wave
/// speed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub sigma: f64,
    pub chi: f64,
    pub chi_hat: f64,
    /// Whether `chi_hat` lies below the critical threshold under which the
    /// sharp-wave construction is guaranteed to work.
    pub assumption3_ok: bool,
}

impl ModelParams {
    pub fn new(sigma: f64, chi: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if !(chi > 0.0) || !chi.is_finite() {
            return Err(Error::InvalidParameter(format!("chi must be positive, got {chi}")));
        }
        let chi_hat = chi / (sigma * sigma);
        Ok(ModelParams {
            sigma,
            chi,
            chi_hat,
            assumption3_ok: chi_hat < chibar(),
        })
    }
}

/// Uniform cell-centered grid on `[-l, l]` with `m` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    /// Half-width of the domain.
    pub l: f64,
    /// Number of cells.
    pub m: usize,
    /// Cell width, `2 l / m`.
    pub dx: f64,
}

impl Grid1D {
    pub fn new(l: f64, m: usize) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParameter(format!("grid half-width must be positive, got {l}")));
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 cells, got {m}")));
        }
        Ok(Grid1D { l, m, dx: 2.0 * l / m as f64 })
    }

    /// Center of cell `i` (0-based): `-l + (i + 1/2) dx`.
    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        -self.l + (i as f64 + 0.5) * self.dx
    }

    /// Position of face `i` (0-based, `m + 1` faces): `-l + i dx`.
    #[inline]
    pub fn face(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |i| self.center(i))
    }
}

/// Cell-averaged scalar field on a [`Grid1D`] at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::InvalidInput(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.m
            )));
        }
        Ok(Field { grid, values, time })
    }

    /// Sample an initial condition at the cell centers at `t = 0`.
    pub fn from_ic(grid: Grid1D, ic: &InitialCondition) -> Self {
        let values = grid.centers().map(|x| ic.eval(x)).collect();
        Field { grid, values, time: 0.0 }
    }

    /// Total mass `sum u_i dx`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx
    }
}

/// Initial profiles used in the experiments.  All evaluate into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Compactly supported quadratic ramp `(x - x0)^2 / (l + x0)^2` on
    /// `[-l, x0]`, zero to the right.
    Polynomial { l: f64, x0: f64 },
    /// Linear ramp `-(x + 15) / 5` on `[-20, -15]`.
    Ramp,
    /// Plateau at 1 on `[-20, -17.5]` followed by the linear ramp down to 0
    /// at `-15`.  Dominates [`InitialCondition::Ramp`] pointwise.
    PlateauRamp,
    /// Logistic profile `1 / (1 + e^{alpha (x - x0)})`.
    Sigmoid { alpha: f64, x0: f64 },
    /// Constant value in `[0, 1]` (used for long-time relaxation checks).
    Constant { value: f64 },
}

impl InitialCondition {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Polynomial { l, x0 } => {
                if (-l..=x0).contains(&x) {
                    let r = (x - x0) / (l + x0);
                    r * r
                } else {
                    0.0
                }
            }
            InitialCondition::Ramp => {
                if (-20.0..=-15.0).contains(&x) {
                    -(x + 15.0) / 5.0
                } else {
                    0.0
                }
            }
            InitialCondition::PlateauRamp => {
                if (-20.0..=-17.5).contains(&x) {
                    1.0
                } else if (-17.5..=-15.0).contains(&x) {
                    -(x + 15.0) / 2.5
                } else {
                    0.0
                }
            }
            InitialCondition::Sigmoid { alpha, x0 } => 1.0 / (1.0 + (alpha * (x - x0)).exp()),
            InitialCondition::Constant { value } => value,
        }
    }

    /// Rightmost support point (above `threshold`) searched on `[-l, l]`.
    /// Used to seed the separatrix tracker.
    pub fn support_right(&self, grid: &Grid1D, threshold: f64) -> f64 {
        for i in (0..grid.m).rev() {
            if self.eval(grid.center(i)) > threshold {
                return grid.center(i) + grid.dx / 2.0;
            }
        }
        -grid.l
    }
}

/// Exponential repulsion kernel `rho(x) = e^{-|x|/sigma} / (2 sigma)`.
/// Unit mass over the line.
#[inline]
pub fn kernel_rho(x: f64, sigma: f64) -> f64 {
    (-x.abs() / sigma).exp() / (2.0 * sigma)
}

/// Spatial derivative of the kernel, `rho'(x) = -sign(x) e^{-|x|/sigma} / (2 sigma^2)`.
#[inline]
pub fn kernel_rho_x(x: f64, sigma: f64) -> f64 {
    -x.signum() * (-x.abs() / sigma).exp() / (2.0 * sigma * sigma)
}

/// Weighted sup-norm `sup_z sqrt(-z) e^{eta z} |f(z)|` over the sampled
/// profile, taken on nodes strictly inside `(-inf, 0)`.
///
/// Requires `0 < eta < 1/sigma`.
pub fn norm_eta(z: &[f64], values: &[f64], eta: f64, sigma: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0 / sigma) {
        return Err(Error::InvalidParameter(format!(
            "eta must lie in (0, 1/sigma) = (0, {}), got {eta}",
            1.0 / sigma
        )));
    }
    if z.len() != values.len() {
        return Err(Error::InvalidInput("norm_eta: mismatched sample lengths".into()));
    }
    let mut sup: f64 = 0.0;
    for (&zi, &vi) in z.iter().zip(values) {
        if zi < 0.0 {
            let w = (-zi).sqrt() * (eta * zi).exp();
            sup = sup.max(w * vi.abs());
        }
    }
    Ok(sup)
}
