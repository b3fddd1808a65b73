//! Construction and verification of generalized symmetric solutions of the
//! minimal gradient graph equation family `G_tau(lambda(D^2 u)) = C0` on
//! punctured space.
//!
//! The family interpolates between the Monge-Ampere equation (`tau = 0`), an
//! inverse harmonic Hessian equation (`tau = pi/4`) and the special Lagrangian
//! equation (`tau = pi/2`). This crate provides:
//!
//! - the five operator branches `F_tau` / `G_tau`, the translation between
//!   them and isotropic quadratic roots ([`operators`]);
//! - elementary symmetric polynomial machinery and the decay exponent
//!   `delta_0` for every branch ([`sympoly`]);
//! - the rank-one Hessian structure of radial profiles, including a secular
//!   eigensolver for `diag(d) + rho v v^T` ([`radial`]);
//! - the radial ODE flow: shooting construction of subsolutions, exact
//!   isotropic profiles by inward integration, and the closed-form
//!   Monge-Ampere profile ([`odeflow`]);
//! - assembly of punctured-space solutions with general symmetric `A`,
//!   reflection symmetry and comparison bounds ([`solution`]);
//! - an independent verification harness with residual, convexity, decay and
//!   rigidity checks ([`verify`]).

pub mod error;
pub mod operators;
pub mod sympoly;
pub mod radial;
pub mod odeflow;
pub mod solution;
pub mod verify;

mod interp;
mod ivp;
mod quad;
mod rootfind;

pub use error::{Error, Result};
