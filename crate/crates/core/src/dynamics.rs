//! Equations of motion of the scattering particle.
//!
//! A unit-mass point `(xi, eta)` moves in the external potential
//! `V = eta * e^{2 xi} / 2`, so that
//!
//! ```text
//! xi''  = -eta * e^{2 xi}
//! eta'' = -e^{2 xi} / 2
//! ```
//!
//! with conserved energy `2E = xi'^2 + eta'^2 + eta e^{2 xi}`. Scattering
//! solutions carry `E = 1/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{EventPoint, Trajectory};

/// Load parameter of the plate equation. All other loads are reached through
/// [`Symmetry::Homologous`].
pub const GAUGE_LAMBDA: f64 = 1.0;

/// Default tolerance on `|eta e^{2 xi} - 1|` for the zero-velocity boundary.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

/// Energy carried by every admitted scattering trajectory.
pub const SCATTERING_ENERGY: f64 = 0.5;

/// Instantaneous state of the particle. `t` is the logarithm of the radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub xi: f64,
    pub eta: f64,
    pub xi_dot: f64,
    pub eta_dot: f64,
}

impl PhasePoint {
    pub fn new(t: f64, xi: f64, eta: f64, xi_dot: f64, eta_dot: f64) -> Self {
        Self {
            t,
            xi,
            eta,
            xi_dot,
            eta_dot,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.xi.is_finite()
            && self.eta.is_finite()
            && self.xi_dot.is_finite()
            && self.eta_dot.is_finite()
    }

    pub fn speed(&self) -> f64 {
        self.xi_dot.hypot(self.eta_dot)
    }

    /// `eta e^{2 xi}`, twice the potential energy.
    pub fn potential_term(&self) -> f64 {
        self.eta * (2.0 * self.xi).exp()
    }

    pub fn energy(&self) -> f64 {
        energy(self)
    }
}

/// Time derivative of a [`PhasePoint`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub dxi: f64,
    pub dxi_dot: f64,
    pub deta: f64,
    pub deta_dot: f64,
}

/// Right-hand side of the first-order system. The system is autonomous.
pub fn rhs(p: &PhasePoint) -> Result<Derivative> {
    let e2 = (2.0 * p.xi).exp();
    if !e2.is_finite() {
        return Err(Error::Overflow { last: *p });
    }
    let dxi_dot = -p.eta * e2;
    if !dxi_dot.is_finite() {
        return Err(Error::Overflow { last: *p });
    }
    Ok(Derivative {
        dxi: p.xi_dot,
        dxi_dot,
        deta: p.eta_dot,
        deta_dot: -0.5 * e2,
    })
}

pub fn energy(p: &PhasePoint) -> f64 {
    0.5 * (p.xi_dot * p.xi_dot + p.eta_dot * p.eta_dot + p.potential_term())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zone {
    Allowed,
    Boundary,
    Forbidden,
}

/// Classifies a position against the `E = 1/2` forbidden zone
/// `eta > e^{-2 xi}`, using [`DEFAULT_BOUNDARY_TOL`].
pub fn in_forbidden_zone(xi: f64, eta: f64) -> Zone {
    classify_zone(xi, eta, DEFAULT_BOUNDARY_TOL)
}

pub fn classify_zone(xi: f64, eta: f64, boundary_tol: f64) -> Zone {
    let product = eta * (2.0 * xi).exp();
    if (product - 1.0).abs() <= boundary_tol {
        Zone::Boundary
    } else if product > 1.0 {
        Zone::Forbidden
    } else {
        Zone::Allowed
    }
}

/// Symmetries of the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    TimeTranslate(f64),
    TimeReverse,
    /// `xi -> xi + xi_h`, `t -> e^{-xi_h} t`; scales the energy by `e^{2 xi_h}`.
    Homologous(f64),
}

impl Symmetry {
    pub fn apply(&self, p: &PhasePoint) -> PhasePoint {
        match *self {
            Symmetry::TimeTranslate(t0) => PhasePoint { t: p.t + t0, ..*p },
            Symmetry::TimeReverse => PhasePoint {
                t: -p.t,
                xi_dot: -p.xi_dot,
                eta_dot: -p.eta_dot,
                ..*p
            },
            Symmetry::Homologous(xi_h) => {
                let scale = xi_h.exp();
                PhasePoint {
                    t: p.t / scale,
                    xi: p.xi + xi_h,
                    eta: p.eta,
                    xi_dot: p.xi_dot * scale,
                    eta_dot: p.eta_dot * scale,
                }
            }
        }
    }

    /// Factor by which the energy of every sample is multiplied.
    pub fn energy_factor(&self) -> f64 {
        match *self {
            Symmetry::Homologous(xi_h) => (2.0 * xi_h).exp(),
            _ => 1.0,
        }
    }
}

/// Applies `s` to every sample and event of `traj`. Sample order is kept
/// increasing in `t`, so time reversal also reverses the sample vector.
pub fn apply_symmetry(traj: &Trajectory, s: Symmetry) -> Trajectory {
    let mut out = traj.clone();
    out.samples = traj.samples.iter().map(|p| s.apply(p)).collect();
    if matches!(s, Symmetry::TimeReverse) {
        out.samples.reverse();
    }
    let map_event = |e: &Option<EventPoint>| {
        e.map(|e| EventPoint {
            t: s.apply(&e.state).t,
            state: s.apply(&e.state),
        })
    };
    out.events.t0 = map_event(&traj.events.t0);
    out.events.t_half = map_event(&traj.events.t_half);
    out.events.t_m = map_event(&traj.events.t_m);
    if let Some(b) = &mut out.events.blowup {
        b.last = s.apply(&b.last);
    }
    out.max_energy_drift = crate::integrator::energy_drift(&out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn accel(xi: f64, eta: f64) -> (f64, f64) {
        let d = rhs(&PhasePoint::new(0.0, xi, eta, 0.0, 0.0)).unwrap();
        (d.dxi_dot, d.deta_dot)
    }

    #[test]
    fn accelerations() {
        assert_eq!(accel(0.0, 1.0), (-1.0, -0.5));

        let (a, b) = accel(-10.0, 5.0);
        assert_relative_eq!(a, -5.0 * (-20.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(b, -0.5 * (-20.0f64).exp(), max_relative = 1e-15);

        let (a, b) = accel(2f64.ln() / 2.0, -1.0);
        assert_relative_eq!(a, 2.0, max_relative = 1e-15);
        assert_relative_eq!(b, -1.0, max_relative = 1e-15);
    }

    #[test]
    fn rhs_passes_velocities_through() {
        let d = rhs(&PhasePoint::new(0.0, -10.0, 5.0, 1.0, 0.0)).unwrap();
        assert_eq!(d.dxi, 1.0);
        assert_eq!(d.deta, 0.0);
    }

    #[test]
    fn rhs_is_autonomous() {
        let a = PhasePoint::new(-3.0, 0.2, 0.7, 0.1, -0.3);
        let b = PhasePoint { t: 11.5, ..a };
        assert_eq!(rhs(&a).unwrap(), rhs(&b).unwrap());
    }

    #[test]
    fn overflow_is_reported() {
        let p = PhasePoint::new(0.0, 400.0, 1.0, 0.0, 0.0);
        match rhs(&p) {
            Err(Error::Overflow { last }) => assert_eq!(last, p),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn energy_values() {
        assert_eq!(energy(&PhasePoint::new(0.0, 0.0, 1.0, 0.0, 0.0)), 0.5);
        assert_relative_eq!(
            energy(&PhasePoint::new(0.0, 0.0, 0.5, 0.6, -0.4)),
            0.51,
            max_relative = 1e-15
        );
        // Nearly free incoming motion.
        let p = PhasePoint::new(-40.0, -40.0, 3.0, 1.0, 0.0);
        assert_relative_eq!(energy(&p), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn zones() {
        assert_eq!(in_forbidden_zone(0.0, 2.0), Zone::Forbidden);
        assert_eq!(in_forbidden_zone(0.0, 0.5), Zone::Allowed);
        assert_eq!(in_forbidden_zone(-1.0, 2f64.exp()), Zone::Boundary);
        assert_eq!(in_forbidden_zone(3.0, -1.0), Zone::Allowed);
    }

    #[test]
    fn point_symmetries() {
        let p = PhasePoint::new(1.5, -0.3, 0.4, 0.2, -0.7);
        let q = Symmetry::TimeTranslate(2.0).apply(&p);
        assert_eq!(q, PhasePoint { t: 3.5, ..p });
        assert_eq!(energy(&q), energy(&p));

        let r = Symmetry::TimeReverse.apply(&p);
        assert_eq!(r, PhasePoint::new(-1.5, -0.3, 0.4, -0.2, 0.7));
        assert_eq!(energy(&r), energy(&p));

        let h = Symmetry::Homologous(0.3);
        assert_relative_eq!(
            energy(&h.apply(&p)),
            energy(&p) * h.energy_factor(),
            max_relative = 1e-14
        );
    }
}
