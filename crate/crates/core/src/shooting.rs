//! Inverse problem: the incoming level `eta_in` that produces a prescribed
//! deflection angle, and tabulation of the deflection map.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::AsymptoticData;
use crate::error::{Error, Result};
use crate::geometry::{pokhozaev_relative, to_radial};
use crate::integrator::{deflection, integrate, BlowUp, Outcome, SolverConfig, Trajectory};

pub const DEFAULT_ROOT_TOL: f64 = 1e-9;

/// Result of one forward run at given incoming data.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum DeflectionOutcome {
    Scattered {
        theta: f64,
        trajectory: Trajectory,
    },
    NotScattered {
        outcome: Outcome,
        blowup: Option<BlowUp>,
    },
}

impl DeflectionOutcome {
    pub fn theta(&self) -> Option<f64> {
        match self {
            DeflectionOutcome::Scattered { theta, .. } => Some(*theta),
            DeflectionOutcome::NotScattered { .. } => None,
        }
    }
}

pub fn deflection_of(eta_in: f64, xi_in: f64, cfg: &SolverConfig) -> Result<DeflectionOutcome> {
    let traj = integrate(&AsymptoticData::new(xi_in, eta_in), cfg)?;
    if traj.escaped() {
        Ok(DeflectionOutcome::Scattered {
            theta: deflection(&traj)?,
            trajectory: traj,
        })
    } else {
        Ok(DeflectionOutcome::NotScattered {
            outcome: traj.outcome,
            blowup: traj.events.blowup,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    /// Targets must lie at least this far inside `(-pi, -pi/2)`.
    pub margin: f64,
    pub seed: f64,
    pub eta_max: f64,
    /// Lowest `eta_in` the downward scan will try.
    pub eta_min: f64,
    pub max_iter: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            margin: 1e-3,
            seed: 8.0,
            eta_max: 1e6,
            eta_min: 1e-3,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub theta_target: f64,
    pub eta_in_found: f64,
    pub theta_achieved: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub trajectory: Trajectory,
}

pub fn shoot(theta_target: f64, cfg: &SolverConfig, root_tol: f64) -> Result<ShootingResult> {
    shoot_with(theta_target, cfg, root_tol, &ShootingOptions::default())
}

struct Probe {
    eta: f64,
    f: f64,
    traj: Trajectory,
}

/// Bracket scan in `eta_in` followed by safeguarded bisection in `ln eta_in`.
///
/// A blow-up met on the downward scan is resolved by bisecting between it
/// and the nearest scattering run until a scattering point on the other side
/// of the target appears.
pub fn shoot_with(
    theta_target: f64,
    cfg: &SolverConfig,
    root_tol: f64,
    opts: &ShootingOptions,
) -> Result<ShootingResult> {
    if !(theta_target > -PI + opts.margin && theta_target < -FRAC_PI_2 - opts.margin) {
        return Err(Error::Precondition {
            op: "shoot",
            detail: format!(
                "target {theta_target} not inside (-pi + {m}, -pi/2 - {m})",
                m = opts.margin
            ),
        });
    }
    if !(root_tol > 0.0) {
        return Err(Error::Config(format!("root_tol = {root_tol}")));
    }
    let mut scanned = Vec::new();
    let mut probe = |eta: f64, scanned: &mut Vec<(f64, f64)>| -> Result<Option<Probe>> {
        let out = deflection_of(eta, 0.0, cfg)?;
        match out {
            DeflectionOutcome::Scattered { theta, trajectory } => {
                scanned.push((eta, theta));
                Ok(Some(Probe {
                    eta,
                    f: theta - theta_target,
                    traj: trajectory,
                }))
            }
            DeflectionOutcome::NotScattered { .. } => {
                scanned.push((eta, f64::NAN));
                Ok(None)
            }
        }
    };
    let not_found = |scanned: Vec<(f64, f64)>| Error::BracketNotFound {
        theta_target,
        scanned,
    };

    let mut evaluations = 0usize;
    let seed = probe(opts.seed, &mut scanned)?;
    evaluations += 1;
    let (mut a, mut b) = match seed {
        Some(p) if p.f.abs() <= root_tol => {
            return Ok(ShootingResult {
                theta_target,
                theta_achieved: p.f + theta_target,
                eta_in_found: p.eta,
                iterations: evaluations,
                bracket: (p.eta, p.eta),
                trajectory: p.traj,
            })
        }
        Some(p) if p.f < 0.0 => {
            // Deflection too strong: scan downward.
            let mut hi = p;
            let mut eta = hi.eta;
            loop {
                eta *= 0.5;
                if eta < opts.eta_min {
                    return Err(not_found(scanned));
                }
                evaluations += 1;
                match probe(eta, &mut scanned)? {
                    Some(q) if q.f >= 0.0 => break (q, hi),
                    Some(q) => hi = q,
                    None => {
                        let lo = edge_search(eta, hi, &mut probe, &mut scanned, &mut evaluations)?;
                        match lo {
                            Some(pair) => break pair,
                            None => return Err(not_found(scanned)),
                        }
                    }
                }
            }
        }
        Some(p) => {
            let mut lo = p;
            let mut eta = lo.eta;
            loop {
                eta *= 2.0;
                if eta > opts.eta_max {
                    return Err(not_found(scanned));
                }
                evaluations += 1;
                match probe(eta, &mut scanned)? {
                    Some(q) if q.f <= 0.0 => break (lo, q),
                    Some(q) => lo = q,
                    None => return Err(not_found(scanned)),
                }
            }
        }
        None => {
            // Seed blew up: march upward to the first scattering run.
            let mut eta = opts.seed;
            let mut dead = eta;
            let hi = loop {
                eta *= 2.0;
                if eta > opts.eta_max {
                    return Err(not_found(scanned));
                }
                evaluations += 1;
                match probe(eta, &mut scanned)? {
                    Some(q) => break q,
                    None => dead = eta,
                }
            };
            if hi.f <= 0.0 {
                match edge_search(dead, hi, &mut probe, &mut scanned, &mut evaluations)? {
                    Some(pair) => pair,
                    None => return Err(not_found(scanned)),
                }
            } else {
                let mut lo = hi;
                let mut eta = lo.eta;
                loop {
                    eta *= 2.0;
                    if eta > opts.eta_max {
                        return Err(not_found(scanned));
                    }
                    evaluations += 1;
                    match probe(eta, &mut scanned)? {
                        Some(q) if q.f <= 0.0 => break (lo, q),
                        Some(q) => lo = q,
                        None => return Err(not_found(scanned)),
                    }
                }
            }
        }
    };

    // `a.f >= 0 >= b.f` with `a.eta < b.eta`.
    for it in 0..opts.max_iter {
        if a.f.abs().min(b.f.abs()) <= root_tol {
            let bracket = (a.eta, b.eta);
            let best = if a.f.abs() <= b.f.abs() { a } else { b };
            return Ok(ShootingResult {
                theta_target,
                eta_in_found: best.eta,
                theta_achieved: best.f + theta_target,
                iterations: evaluations,
                bracket,
                trajectory: best.traj,
            });
        }
        let (xa, xb) = (a.eta.ln(), b.eta.ln());
        let mid = 0.5 * (xa + xb);
        let mut x = mid;
        if it % 2 == 1 {
            let sec = xa - a.f * (xb - xa) / (b.f - a.f);
            let inner = 0.05 * (xb - xa);
            if sec.is_finite() && sec > xa + inner && sec < xb - inner {
                x = sec;
            }
        }
        let eta = x.exp();
        if !(eta > a.eta && eta < b.eta) {
            break;
        }
        evaluations += 1;
        match probe(eta, &mut scanned)? {
            Some(q) if q.f >= 0.0 => a = q,
            Some(q) => b = q,
            // A non-scattering point inside the bracket; its left part is discarded.
            None => {
                a = match edge_search(eta, b, &mut probe, &mut scanned, &mut evaluations)? {
                    Some((lo, hi)) => {
                        b = hi;
                        lo
                    }
                    None => return Err(not_found(scanned)),
                };
            }
        }
    }
    let last_change = a.f.abs().min(b.f.abs());
    Err(Error::NonConvergence {
        what: "shoot",
        iterations: evaluations,
        last_change,
    })
}

/// Between a non-scattering `dead` level and a scattering `hi` that
/// overshoots the target, finds a scattering point that undershoots.
fn edge_search<F>(
    dead: f64,
    hi: Probe,
    probe: &mut F,
    scanned: &mut Vec<(f64, f64)>,
    evaluations: &mut usize,
) -> Result<Option<(Probe, Probe)>>
where
    F: FnMut(f64, &mut Vec<(f64, f64)>) -> Result<Option<Probe>>,
{
    let mut dead = dead;
    let mut hi = hi;
    while (hi.eta - dead) > 1e-14 * hi.eta {
        let mid = 0.5 * (dead + hi.eta);
        *evaluations += 1;
        match probe(mid, scanned)? {
            Some(q) if q.f >= 0.0 => return Ok(Some((q, hi))),
            Some(q) => hi = q,
            None => dead = mid,
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub theta_achieved: f64,
    pub eta_in: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub k_star: f64,
    /// `(alpha^2 - 2 kappa (4 pi - kappa)) / 16 pi^2`.
    pub pokhozaev_residual: f64,
    pub energy_drift: f64,
    pub status: RowStatus,
    pub message: Option<String>,
}

impl SweepRow {
    fn failed(theta: f64, e: &Error) -> Self {
        Self {
            theta,
            theta_achieved: f64::NAN,
            eta_in: f64::NAN,
            kappa: f64::NAN,
            alpha: f64::NAN,
            k_star: f64::NAN,
            pokhozaev_residual: f64::NAN,
            energy_drift: f64::NAN,
            status: RowStatus::Failed,
            message: Some(e.to_string()),
        }
    }
}

fn sweep_row(theta: f64, cfg: &SolverConfig) -> Result<SweepRow> {
    let shot = shoot(theta, cfg, DEFAULT_ROOT_TOL)?;
    let sol = to_radial(&shot.trajectory)?;
    Ok(SweepRow {
        theta,
        theta_achieved: shot.theta_achieved,
        eta_in: shot.eta_in_found,
        kappa: sol.kappa,
        alpha: sol.alpha,
        k_star: sol.k_star,
        pokhozaev_residual: pokhozaev_relative(sol.kappa, sol.alpha),
        energy_drift: shot.trajectory.max_energy_drift,
        status: if sol.quadrature.partial {
            RowStatus::Failed
        } else {
            RowStatus::Ok
        },
        message: sol
            .quadrature
            .partial
            .then(|| "tail fit failed".to_string()),
    })
}

/// One shooting run and radial reconstruction per grid angle, in grid order.
/// Rows run concurrently; failures are recorded per row.
pub fn sweep(theta_grid: &[f64], cfg: &SolverConfig) -> Vec<SweepRow> {
    theta_grid
        .par_iter()
        .map(|&theta| sweep_row(theta, cfg).unwrap_or_else(|e| SweepRow::failed(theta, &e)))
        .collect()
}

/// `n` equally spaced angles from `theta_min` to `theta_max` inclusive.
pub fn theta_grid(theta_min: f64, theta_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![theta_min],
        _ => (0..n)
            .map(|i| theta_min + (theta_max - theta_min) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
