//! Closed-form iterates, sub- and supersolutions, explicit time bounds and
//! the start-state expansion used to seed the integrator.

use serde::{Deserialize, Serialize};

use crate::dynamics::PhasePoint;
use crate::error::{Error, Result};

/// Largest `w = e^{2(xi_in + t_start)}` accepted by [`asymptotic_start_state`].
pub const DEFAULT_START_THRESHOLD: f64 = 1e-10;

/// Upper estimate `sqrt(2) e^{arcosh 2} = sqrt(2) (2 + sqrt(3))` for the
/// critical `eta_in` above which `xi` attains its maximum before `T0`.
pub fn eta_crit_upper() -> f64 {
    std::f64::consts::SQRT_2 * (2.0 + 3f64.sqrt())
}

/// Past-infinity data: `xi - t -> xi_in` and `eta -> eta_in` as `t -> -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticData {
    pub xi_in: f64,
    pub eta_in: f64,
}

impl AsymptoticData {
    pub fn new(xi_in: f64, eta_in: f64) -> Self {
        Self { xi_in, eta_in }
    }

    /// Only `eta_in > 0` can produce a scattering solution.
    pub fn is_scattering_candidate(&self) -> bool {
        self.eta_in > 0.0
    }

    fn require_positive(&self, op: &'static str) -> Result<()> {
        if self.eta_in > 0.0 && self.eta_in.is_finite() && self.xi_in.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain {
                op,
                detail: format!("eta_in = {} must be positive and finite", self.eta_in),
            })
        }
    }
}

/// `ln cosh z`, stable for large `|z|`.
pub fn ln_cosh(z: f64) -> f64 {
    let a = z.abs();
    a - std::f64::consts::LN_2 + (-2.0 * a).exp().ln_1p()
}

/// Zeroth iterate, the solution of `xi'' = -eta_in e^{2 xi}` with the given
/// incoming data. Subsolution of `xi` for `t < T_{1/2}`.
pub fn xi0(t: f64, a: &AsymptoticData) -> Result<f64> {
    a.require_positive("xi0")?;
    let shift = (2.0 / a.eta_in.sqrt()).ln();
    Ok(-ln_cosh(t + a.xi_in - shift) - a.eta_in.sqrt().ln())
}

/// First `eta` iterate, obtained by integrating `xi0` twice.
pub fn eta1(t: f64, a: &AsymptoticData) -> Result<f64> {
    a.require_positive("eta1")?;
    let e = a.eta_in;
    let shift = (2.0 / e.sqrt()).ln();
    Ok(
        -ln_cosh(t + a.xi_in - shift) / (2.0 * e) - t / (2.0 * e) - a.xi_in / (2.0 * e) + e
            - e.ln() / (4.0 * e),
    )
}

/// Supersolution of `xi` for `t < T_{1/2}`: the solution of
/// `xi'' = -(eta_in / 2) e^{2 xi}` with the same incoming data.
pub fn xi_hat(t: f64, a: &AsymptoticData) -> Result<f64> {
    a.require_positive("xi_hat")?;
    let shift = (2.0 * (2.0 / a.eta_in).sqrt()).ln();
    Ok(-ln_cosh(t + a.xi_in - shift) - (a.eta_in / 2.0).sqrt().ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Lower bound for the zero crossing `T0` of `eta`.
    pub t0_lower: f64,
    /// Lower bound for `T_{1/2}`, where `eta = eta_in / 2`.
    pub t_half_lower: f64,
    /// Maximiser of `xi0`.
    pub tm0: f64,
    /// Maximiser of `xi_hat`.
    pub tm_hat: f64,
    pub eta_crit_upper: f64,
}

pub fn explicit_bounds(a: &AsymptoticData) -> Result<BoundsReport> {
    a.require_positive("explicit_bounds")?;
    let e = a.eta_in;
    Ok(BoundsReport {
        t0_lower: (2.0 * (2.0 * e).sqrt()).ln() - a.xi_in,
        t_half_lower: (2.0 * e.sqrt()).ln() - a.xi_in,
        tm0: (2.0 / e.sqrt()).ln() - a.xi_in,
        tm_hat: (2.0 * (2.0 / e).sqrt()).ln() - a.xi_in,
        eta_crit_upper: eta_crit_upper(),
    })
}

/// Bounds on the state at `T0`, valid for `eta_in` above
/// [`eta_crit_upper`]. They do not depend on `xi_in`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCrossingBounds {
    pub xi_upper: f64,
    pub xi_dot_upper: f64,
    pub eta_dot_lower: f64,
}

pub fn zero_crossing_bounds(eta_in: f64) -> Result<ZeroCrossingBounds> {
    if !(eta_in > eta_crit_upper()) {
        return Err(Error::Domain {
            op: "zero_crossing_bounds",
            detail: format!("eta_in = {eta_in} must exceed {}", eta_crit_upper()),
        });
    }
    let lc = ln_cosh((eta_in / std::f64::consts::SQRT_2).ln());
    let half_ln2 = 0.5 * std::f64::consts::LN_2;
    let slope = (-lc + half_ln2) / eta_in.ln();
    Ok(ZeroCrossingBounds {
        xi_upper: -lc - (eta_in / 2.0).sqrt().ln(),
        xi_dot_upper: slope,
        eta_dot_lower: -(1.0 - slope * slope).sqrt(),
    })
}

/// State at `t_start` from one substitution of the free incoming motion into
/// the integral equations. Truncation error is `O(w^2)` with
/// `w = e^{2(xi_in + t_start)}`.
pub fn asymptotic_start_state(t_start: f64, a: &AsymptoticData) -> Result<PhasePoint> {
    asymptotic_start_state_with(t_start, a, DEFAULT_START_THRESHOLD)
}

pub fn asymptotic_start_state_with(
    t_start: f64,
    a: &AsymptoticData,
    threshold: f64,
) -> Result<PhasePoint> {
    let w = (2.0 * (a.xi_in + t_start)).exp();
    if !(w <= threshold) {
        return Err(Error::Precision {
            t_start,
            w,
            threshold,
        });
    }
    let e = a.eta_in;
    Ok(PhasePoint {
        t: t_start,
        xi: a.xi_in + t_start - 0.25 * e * w,
        eta: e - 0.125 * w,
        xi_dot: 1.0 - 0.5 * e * w,
        eta_dot: -0.25 * w,
    })
}
