//! Edge-state spectra induced by Robin-type and chiral boundary conditions.
//!
//! The crate covers the one-dimensional Robin interval problem and its
//! analytic bounds, the collar bounds built from it, a finite-difference
//! Sturm-bisection oracle, the chiral-bag Dirac spectrum on the 3-ball and
//! the trial-state bound for APS-type boundary conditions.

pub mod aps_bound;
pub mod cli;
pub mod collar_bounds;
pub mod dirac_ball;
pub mod error;
pub mod fd_oracle;
pub mod quadrature;
pub mod robin1d;
pub mod roots;
pub mod specfun;

pub use error::{Result, SpectraError};
