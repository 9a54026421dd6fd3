//! Diagnostics from the existence and uniqueness arguments: pointwise spectra
//! of the linearised system, the gradient-flow recurrence at the zero
//! crossing, and the inflection structure of the orbit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;

/// Allowed increase of `g = xi_dot - 2 eta eta_dot` between samples before
/// monotone decrease is reported as violated.
pub const G_MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub t: f64,
    /// `sqrt(mu_plus)`.
    pub lambda_real: f64,
    /// `sqrt(-mu_minus)`.
    pub lambda_imag: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

/// Roots in `mu = lambda^2` of `lambda^4 + 2 eta2 e^{2 phi} lambda^2 - e^{2 phi + 2 xi1}`.
pub fn linearization_spectrum(xi1: f64, eta2: f64, phi: f64) -> SpectrumSample {
    spectrum_at(f64::NAN, xi1, eta2, phi)
}

fn spectrum_at(t: f64, xi1: f64, eta2: f64, phi: f64) -> SpectrumSample {
    let b = eta2 * (2.0 * phi).exp();
    let sqrt_c = (phi + xi1).exp();
    let c = sqrt_c * sqrt_c;
    let disc = b.hypot(sqrt_c);
    // The root of larger magnitude first, the other from the product `-c`.
    let (mu_plus, mu_minus) = if b >= 0.0 {
        let m = -b - disc;
        (-c / m, m)
    } else {
        let p = -b + disc;
        (p, -c / p)
    };
    SpectrumSample {
        t,
        lambda_real: mu_plus.sqrt(),
        lambda_imag: (-mu_minus).sqrt(),
        mu_plus,
        mu_minus,
    }
}

/// Self-linearisation along the samples: `xi1 = phi = xi(t)`, `eta2 = eta(t)`.
pub fn spectrum_along(traj: &Trajectory) -> Vec<SpectrumSample> {
    traj.samples
        .iter()
        .map(|p| spectrum_at(p.t, p.xi, p.eta, p.xi))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientFlowState {
    pub mu: f64,
    pub nu: f64,
    pub mu0: f64,
    pub nu0: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl GradientFlowState {
    /// Starts at the anchor `(mu0, nu0)`, which must lie on the unit circle.
    pub fn new(mu0: f64, nu0: f64, delta: f64, epsilon: f64) -> Result<Self> {
        if ((mu0 * mu0 + nu0 * nu0) - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition {
                op: "GradientFlowState::new",
                detail: format!("mu0^2 + nu0^2 = {} != 1", mu0 * mu0 + nu0 * nu0),
            });
        }
        if !(delta >= 0.0) {
            return Err(Error::Precondition {
                op: "GradientFlowState::new",
                detail: format!("delta = {delta} < 0"),
            });
        }
        Ok(Self {
            mu: mu0,
            nu: nu0,
            mu0,
            nu0,
            delta,
            epsilon,
        })
    }

    /// Anchor at `mu0` on the lower-left arc of the unit circle.
    pub fn on_circle(mu0: f64, delta: f64, epsilon: f64) -> Result<Self> {
        let nu0 = -(1.0 - mu0 * mu0).max(0.0).sqrt();
        let n = mu0.hypot(nu0);
        Self::new(mu0 / n, nu0 / n, delta, epsilon)
    }

    pub fn with_start(self, mu: f64, nu: f64) -> Self {
        Self { mu, nu, ..self }
    }

    /// `W = |(mu, nu) - (mu0, nu0)|^2 / 2 - delta nu / mu`.
    pub fn potential(&self, mu: f64, nu: f64) -> f64 {
        0.5 * ((mu - self.mu0).powi(2) + (nu - self.nu0).powi(2)) - self.delta * nu / mu
    }

    pub fn grad(&self, mu: f64, nu: f64) -> (f64, f64) {
        (
            mu - self.mu0 + self.delta * nu / (mu * mu),
            nu - self.nu0 - self.delta / mu,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub fixed_point: (f64, f64),
    pub iterations: usize,
    pub stayed_in_quadrant: bool,
    pub grad_norm: f64,
    /// Iterates, starting with the initial point.
    pub history: Vec<(f64, f64)>,
}

/// Iterates `p_{n+1} = p_n - epsilon grad W(p_n)` until `|grad W| <= tol`.
pub fn gradient_flow_run(s0: &GradientFlowState, tol: f64, max_iter: usize) -> Result<FlowResult> {
    if !(s0.mu < 0.0 && s0.nu < 0.0) {
        return Err(Error::Precondition {
            op: "gradient_flow_run",
            detail: format!(
                "start ({}, {}) not in the open negative quadrant",
                s0.mu, s0.nu
            ),
        });
    }
    if !(s0.epsilon > 0.0 && s0.epsilon < 1.0) {
        return Err(Error::Precondition {
            op: "gradient_flow_run",
            detail: format!("epsilon = {} outside (0, 1)", s0.epsilon),
        });
    }
    let (mut mu, mut nu) = (s0.mu, s0.nu);
    let mut history = vec![(mu, nu)];
    for n in 0..=max_iter {
        let (gm, gn) = s0.grad(mu, nu);
        let g = gm.hypot(gn);
        if g <= tol {
            return Ok(FlowResult {
                fixed_point: (mu, nu),
                iterations: n,
                stayed_in_quadrant: true,
                grad_norm: g,
                history,
            });
        }
        if n == max_iter {
            return Err(Error::NonConvergence {
                what: "gradient flow",
                iterations: n,
                last_change: s0.epsilon * g,
            });
        }
        mu -= s0.epsilon * gm;
        nu -= s0.epsilon * gn;
        history.push((mu, nu));
        if !(mu < 0.0 && nu < 0.0) {
            return Err(Error::LeftQuadrant {
                iteration: n + 1,
                mu,
                nu,
            });
        }
    }
    unreachable!("loop returns by max_iter")
}

/// Largest `delta` (to relative precision `rel`) for which the flow anchored
/// at `mu0` still converges inside the quadrant.
pub fn empirical_delta0(mu0: f64, epsilon: f64, rel: f64) -> Result<f64> {
    let converges = |delta: f64| -> Result<bool> {
        let s = GradientFlowState::on_circle(mu0, delta, epsilon)?;
        Ok(gradient_flow_run(&s, 1e-10, 100_000).is_ok())
    };
    let mut lo = 0.0;
    let mut hi = 1e-6;
    while converges(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::NoCrossing("quadrant exit in delta"));
        }
    }
    while hi - lo > rel * hi {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflectionReport {
    pub t_inflection: f64,
    pub eta_sim: f64,
    pub sign_pattern_ok: bool,
    pub g_start: f64,
    pub sign_changes: usize,
    /// Largest sample-to-sample increase of `g`.
    pub worst_increase: f64,
    pub g_monotone: bool,
}

/// `g = xi_dot - 2 eta eta_dot` at a sample.
pub fn convexity_g(p: &crate::dynamics::PhasePoint) -> f64 {
    p.xi_dot - 2.0 * p.eta * p.eta_dot
}

pub fn inflection_diagnostics(traj: &Trajectory) -> Result<InflectionReport> {
    if !traj.escaped() {
        return Err(Error::NotEscaped(format!("outcome {:?}", traj.outcome)));
    }
    let g: Vec<f64> = traj.samples.iter().map(convexity_g).collect();
    let mut sign_changes = 0;
    let mut crossing = None;
    let mut worst_increase = f64::NEG_INFINITY;
    for (i, w) in g.windows(2).enumerate() {
        worst_increase = worst_increase.max(w[1] - w[0]);
        if (w[0] > 0.0) != (w[1] > 0.0) {
            sign_changes += 1;
            if crossing.is_none() && w[0] > 0.0 {
                crossing = Some(i);
            }
        }
    }
    let i = crossing.ok_or(Error::NoCrossing("xi_dot - 2 eta eta_dot"))?;
    let (p, q) = (&traj.samples[i], &traj.samples[i + 1]);
    let s = g[i] / (g[i] - g[i + 1]);
    let t_inflection = p.t + s * (q.t - p.t);
    let eta_sim = p.eta + s * (q.eta - p.eta);
    let sign_pattern_ok = traj.samples.iter().zip(&g).all(|(p, &gk)| {
        let f2 = (2.0 * p.xi).exp() * gk / (2.0 * p.eta_dot.powi(3));
        if f2 == 0.0 || !f2.is_finite() {
            return true;
        }
        if p.eta > eta_sim {
            f2 < 0.0
        } else if p.eta < eta_sim {
            f2 > 0.0
        } else {
            true
        }
    });
    Ok(InflectionReport {
        t_inflection,
        eta_sim,
        sign_pattern_ok,
        g_start: g[0],
        sign_changes,
        worst_increase,
        g_monotone: worst_increase <= G_MONOTONE_SLACK,
    })
}
