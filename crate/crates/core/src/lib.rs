//! Ladder sequences of spherical harmonics near their caustic latitude circles.
//!
//! The crate evaluates the normalized associated Legendre functions exactly
//! (with a decimal-exponent carrier so that large orders do not underflow),
//! and compares them against the leading WKB approximation in the allowed
//! region and the leading Airy approximation at the caustic. It also builds
//! the empirical measures of `|Y^m_N|^2` restricted to a latitude circle and
//! checks their arcsine weak limit through two independent characteristic
//! function routes.
//!
//! Modules, bottom-up:
//!
//! * [`quadrature`]: Gauss-Legendre rules and adaptive Gauss-Kronrod integration.
//! * [`specfun`]: Airy `Ai`/`Ai'`, Bessel `J0`, Legendre polynomials, log-gamma.
//! * [`legendre`]: normalized associated Legendre functions, ladders, the mode `u_h`.
//! * [`semiclassics`]: turning points, action, Airy argument, WKB/Airy leading terms, scans.
//! * [`measures`]: empirical measures, arcsine limit, characteristic functions.
//! * [`cli`]: command implementations and CSV/JSON emission behind the `caustics` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod legendre;
pub mod measures;
pub mod quadrature;
pub mod semiclassics;
pub mod specfun;

pub use error::{Error, Result};
