//! Numerical laboratory for a one-dimensional hyperbolic Keller-Segel model
//! with logistic growth and nonlocal repulsive pressure.
//!
//! The density `u` is advected down the gradient of a pressure field
//! `p = (I - sigma^2 Laplacian)^{-1} u` while growing logistically.  The crate
//! provides:
//!
//! * [`hyperbolic`] — an explicit upwind finite-volume scheme on a bounded
//!   interval with Neumann pressure and conservative boundary fluxes,
//! * [`elliptic`] — the tridiagonal pressure resolvent and the analytic
//!   exponential-kernel convolution on the half-line,
//! * [`diagnostics`] — level-set front tracking, separatrix integration,
//!   jump-height and speed measurements,
//! * [`travelingwave`] — construction of the sharp discontinuous traveling
//!   wave by fixed-point iteration of the profile operator, with two
//!   independent integration routes,
//! * [`config`] — the experiment configuration format used by the CLI.

pub mod config;
pub mod diagnostics;
pub mod elliptic;
mod error;
pub mod hyperbolic;
pub mod model;
pub mod travelingwave;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
