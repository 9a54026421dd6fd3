//! Radial solutions of the conformal plate buckling system
//!
//! ```text
//! -Δu = K e^{2u},   -ΔK = e^{2u}   on R^2
//! ```
//!
//! obtained from a Newtonian scattering problem in the potential
//! `V(xi, eta) = eta e^{2 xi} / 2`. With `t = ln r`,
//! `u(r) = xi(t) - t - ln(2)/4` and `K(r) = sqrt(2) eta(t)`.
//!
//! Modules:
//! - [`dynamics`]: equations of motion, energy, forbidden zone, symmetries.
//! - [`closed_forms`]: closed-form iterates, envelopes and time bounds.
//! - [`picard`]: past- and future-zone fixed-point iterations.
//! - [`integrator`]: adaptive integration, events and deflection angle.
//! - [`shooting`]: target-deflection search over `eta_in` and sweeps.
//! - [`geometry`]: reconstruction of `(u, K)`, area and integral curvature.
//! - [`analysis`]: linearisation spectra, gradient-flow recurrence, inflection.
//! - [`export`]: CSV and JSON writers.
//! - [`verify`]: invariant suite with one line item per property.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod closed_forms;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod geometry;
pub mod integrator;
pub mod picard;
pub mod shooting;
pub mod verify;

pub use closed_forms::AsymptoticData;
pub use dynamics::PhasePoint;
pub use error::{Error, Result};
pub use integrator::{integrate, SolverConfig, Trajectory};
