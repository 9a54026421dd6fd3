//! CSV and JSON emission. CSV floats carry 12 significant digits; JSON uses
//! the shortest representation that round-trips.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{FlowResult, SpectrumSample};
use crate::closed_forms::AsymptoticData;
use crate::geometry::{
    asymptotic_fit, pde_residual, pokhozaev_relative, predicted_intercepts, to_radial,
    AsymptoticFit, RadialSolution,
};
use crate::integrator::{deflection, BlowUp, Outcome, Trajectory};
use crate::shooting::SweepRow;

pub const SCHEMA: &str = "plate-buckling/summary/1";
pub const SWEEP_SCHEMA: &str = "plate-buckling/sweep/1";

pub const TRAJECTORY_HEADER: &str = "t,xi,eta,xi_dot,eta_dot,energy";
pub const RADIAL_HEADER: &str = "r,u,K";
pub const SWEEP_HEADER: &str = "theta,eta_in,kappa,alpha,k_star,pokhozaev_residual,energy_drift";

pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

fn csv<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = String::with_capacity(64);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&x| csv_float(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    csv(
        TRAJECTORY_HEADER,
        traj.samples
            .iter()
            .map(|p| [p.t, p.xi, p.eta, p.xi_dot, p.eta_dot, p.energy()]),
    )
}

pub fn radial_csv(sol: &RadialSolution) -> String {
    csv(
        RADIAL_HEADER,
        sol.r_grid
            .iter()
            .zip(&sol.u_values)
            .zip(&sol.k_values)
            .map(|((&r, &u), &k)| [r, u, k]),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv(
        SWEEP_HEADER,
        rows.iter().map(|r| {
            [
                r.theta,
                r.eta_in,
                r.kappa,
                r.alpha,
                r.k_star,
                r.pokhozaev_residual,
                r.energy_drift,
            ]
        }),
    )
}

pub fn spectrum_csv(samples: &[SpectrumSample]) -> String {
    csv(
        "t,lambda_real,lambda_imag,mu_plus,mu_minus",
        samples
            .iter()
            .map(|s| [s.t, s.lambda_real, s.lambda_imag, s.mu_plus, s.mu_minus]),
    )
}

pub fn flow_csv(run: &FlowResult) -> String {
    csv(
        "n,mu,nu",
        run.history
            .iter()
            .enumerate()
            .map(|(n, &(mu, nu))| [n as f64, mu, nu]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventTimes {
    pub t0: Option<f64>,
    pub t_half: Option<f64>,
    pub t_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub pokhozaev: f64,
    pub pde_u: f64,
    pub pde_k: f64,
    pub fit: f64,
    pub u_intercept_predicted: f64,
    pub k_intercept_predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub inputs: AsymptoticData,
    pub outcome: Outcome,
    pub blowup: Option<BlowUp>,
    pub events: EventTimes,
    pub theta: Option<f64>,
    pub kappa: Option<f64>,
    pub alpha: Option<f64>,
    pub k_star: Option<f64>,
    pub pokhozaev_residual: Option<f64>,
    pub quadrature_partial: Option<bool>,
    pub fits: Option<AsymptoticFit>,
    pub residuals: Option<Residuals>,
    pub max_energy_drift: f64,
    pub notes: Vec<String>,
}

/// Summary of a forward run; geometric fields are filled only for escaped
/// trajectories. Returns the radial solution alongside when available.
pub fn summarize(a: &AsymptoticData, traj: &Trajectory) -> (Summary, Option<RadialSolution>) {
    let mut s = Summary {
        schema: SCHEMA.to_string(),
        inputs: *a,
        outcome: traj.outcome,
        blowup: traj.events.blowup,
        events: EventTimes {
            t0: traj.events.t0(),
            t_half: traj.events.t_half(),
            t_m: traj.events.t_m(),
        },
        theta: None,
        kappa: None,
        alpha: None,
        k_star: None,
        pokhozaev_residual: None,
        quadrature_partial: None,
        fits: None,
        residuals: None,
        max_energy_drift: traj.max_energy_drift,
        notes: Vec::new(),
    };
    if !traj.escaped() {
        return (s, None);
    }
    match deflection(traj) {
        Ok(th) => s.theta = Some(th),
        Err(e) => s.notes.push(e.to_string()),
    }
    let sol = match to_radial(traj) {
        Ok(sol) => sol,
        Err(e) => {
            s.notes.push(e.to_string());
            return (s, None);
        }
    };
    s.kappa = Some(sol.kappa);
    s.alpha = Some(sol.alpha);
    s.k_star = Some(sol.k_star);
    s.quadrature_partial = Some(sol.quadrature.partial);
    let pk = pokhozaev_relative(sol.kappa, sol.alpha);
    s.pokhozaev_residual = Some(pk);
    let fit = asymptotic_fit(&sol);
    let pde = pde_residual(&sol);
    match (&fit, &pde) {
        (Ok(f), Ok((ru, rk))) => {
            let (cu, ck) = predicted_intercepts(&sol);
            s.fits = Some(*f);
            s.residuals = Some(Residuals {
                pokhozaev: pk,
                pde_u: *ru,
                pde_k: *rk,
                fit: f.residual,
                u_intercept_predicted: cu,
                k_intercept_predicted: ck,
            });
        }
        _ => {
            for e in [fit.err(), pde.err()].into_iter().flatten() {
                s.notes.push(e.to_string());
            }
        }
    }
    (s, Some(sol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(rows: Vec<SweepRow>) -> Self {
        Self {
            schema: SWEEP_SCHEMA.to_string(),
            rows,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}
