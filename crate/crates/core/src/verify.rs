//! Invariant suite: one pass/fail line item per property, evaluated on a set
//! of incoming levels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::inflection_diagnostics;
use crate::closed_forms::{
    eta_crit_upper, explicit_bounds, xi0, xi_hat, zero_crossing_bounds, AsymptoticData,
};
use crate::dynamics::PhasePoint;
use crate::geometry::{asymptotic_fit, pokhozaev_relative, to_radial};
use crate::integrator::{deflection, integrate, integrate_from, SolverConfig, Trajectory};
use crate::picard::{
    iterate_future, iterate_past, monotonicity_report, past_zone_bound_violation, GridFunction,
};

pub const DEFAULT_LEVELS: [f64; 3] = [6.0, 8.0, 12.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineItem {
    pub name: String,
    pub eta_in: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub items: Vec<LineItem>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.items
            .iter()
            .map(|i| {
                format!(
                    "{} eta_in={} {}: {}",
                    if i.passed { "PASS" } else { "FAIL" },
                    i.eta_in,
                    i.name,
                    i.detail
                )
            })
            .collect()
    }
}

/// Largest deviation between the grid functions and the samples that fall
/// on grid nodes.
pub fn compare_on_grid(
    xi: &GridFunction,
    eta: &GridFunction,
    samples: &[PhasePoint],
) -> (f64, f64) {
    let mut err = (0.0f64, 0.0f64);
    for p in samples {
        let s = (p.t - xi.t_min) / xi.step;
        let k = s.round();
        if k < 0.0 || k as usize >= xi.len() || (s - k).abs() > 1e-6 {
            continue;
        }
        let k = k as usize;
        err.0 = err.0.max((xi.values[k] - p.xi).abs());
        err.1 = err.1.max((eta.values[k] - p.eta).abs());
    }
    err
}

struct Ctx<'a> {
    eta_in: f64,
    items: &'a mut Vec<LineItem>,
}

impl Ctx<'_> {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.items.push(LineItem {
            name: name.to_string(),
            eta_in: self.eta_in,
            passed,
            detail,
        });
    }
}

/// Runs every line item for each level with `xi_in = 0`.
pub fn run_suite(levels: &[f64], cfg: &SolverConfig) -> VerifyReport {
    let mut items = Vec::new();
    for &eta_in in levels {
        let mut ctx = Ctx {
            eta_in,
            items: &mut items,
        };
        let a = AsymptoticData::new(0.0, eta_in);
        match integrate(&a, cfg) {
            Ok(traj) if traj.escaped() => check_level(&mut ctx, &a, &traj, cfg),
            Ok(traj) => ctx.push("scattering", false, format!("outcome {:?}", traj.outcome)),
            Err(e) => ctx.push("scattering", false, e.to_string()),
        }
    }
    VerifyReport {
        schema: "plate-buckling/verify/1".to_string(),
        items,
    }
}

fn check_level(ctx: &mut Ctx, a: &AsymptoticData, traj: &Trajectory, cfg: &SolverConfig) {
    let drift = traj.max_energy_drift;
    ctx.push(
        "energy",
        drift <= 1e-8,
        format!("max |2E - 1| = {drift:.3e}"),
    );

    let zone = traj
        .samples
        .iter()
        .map(|p| p.potential_term())
        .fold(f64::NEG_INFINITY, f64::max);
    ctx.push(
        "forbidden zone",
        zone <= 1.0 + 1e-9,
        format!("max eta e^(2 xi) = {zone:.12}"),
    );

    match inflection_diagnostics(traj) {
        Ok(r) => ctx.push(
            "inflection",
            (r.g_start - 1.0).abs() <= 1e-6
                && r.g_monotone
                && r.sign_changes == 1
                && r.eta_sim < a.eta_in
                && r.sign_pattern_ok,
            format!(
                "g(start) = {:.9}, worst increase {:.2e}, {} sign change(s), eta_sim = {:.6}",
                r.g_start, r.worst_increase, r.sign_changes, r.eta_sim
            ),
        ),
        Err(e) => ctx.push("inflection", false, e.to_string()),
    }

    let bounds = match explicit_bounds(a) {
        Ok(b) => b,
        Err(e) => {
            ctx.push("bounds", false, e.to_string());
            return;
        }
    };

    match iterate_past(a, bounds.t0_lower - 1.0, 1e-3, 1e-10, 50) {
        Ok(run) => {
            let mono = monotonicity_report(&run);
            let (ex, ee) = compare_on_grid(run.limit_xi(), run.limit_eta(), &traj.samples);
            ctx.push(
                "monotone past iteration",
                run.converged && mono.ordered && ex.max(ee) <= 1e-6,
                format!(
                    "{} iterates, worst violation {:.2e}, limit vs integrator {:.2e}",
                    run.iterates_xi.len(),
                    mono.worst_violation,
                    ex.max(ee)
                ),
            );
            let v = past_zone_bound_violation(&run, a);
            let t0 = traj.events.t0();
            ctx.push(
                "past-zone bounds",
                v <= 1e-12 && t0.is_some_and(|t| t > bounds.t0_lower),
                format!(
                    "iterate bound violation {v:.2e}, T0 = {t0:?} > {:.6}",
                    bounds.t0_lower
                ),
            );
        }
        Err(e) => ctx.push("monotone past iteration", false, e.to_string()),
    }

    let th = traj.events.t_half();
    let sandwich = th.map(|t_half| {
        traj.samples
            .iter()
            .filter(|p| p.t < t_half)
            .map(|p| {
                let lo = xi0(p.t, a).map(|v| p.xi - v).unwrap_or(f64::NAN);
                let hi = xi_hat(p.t, a).map(|v| v - p.xi).unwrap_or(f64::NAN);
                lo.min(hi)
            })
            .fold(f64::INFINITY, f64::min)
    });
    ctx.push(
        "half-level time and envelopes",
        th.is_some_and(|t| t > bounds.t_half_lower) && sandwich.is_some_and(|s| s >= -1e-8),
        format!(
            "T_half = {th:?} > {:.6}, envelope slack {:.2e}",
            bounds.t_half_lower,
            sandwich.unwrap_or(f64::NAN)
        ),
    );

    if a.eta_in > eta_crit_upper() {
        let ok = match (
            traj.events.t0,
            traj.events.t_m,
            zero_crossing_bounds(a.eta_in),
        ) {
            (Some(e0), Some(em), Ok(zb)) => {
                let s = e0.state;
                let pass = em.t < e0.t
                    && s.xi - a.xi_in < zb.xi_upper
                    && s.xi_dot < zb.xi_dot_upper
                    && s.eta_dot > zb.eta_dot_lower;
                (
                    pass,
                    format!(
                        "T_M = {:.6} < T0 = {:.6}; xi = {:.6} < {:.6}; xi_dot = {:.6} < {:.6}; eta_dot = {:.6} > {:.6}",
                        em.t, e0.t, s.xi - a.xi_in, zb.xi_upper, s.xi_dot, zb.xi_dot_upper,
                        s.eta_dot, zb.eta_dot_lower
                    ),
                )
            }
            _ => (false, "missing T0 or T_M event".to_string()),
        };
        ctx.push("interior maximum and T0 state", ok.0, ok.1);
    } else {
        ctx.push(
            "interior maximum and T0 state",
            true,
            format!("not applicable below {:.6}", eta_crit_upper()),
        );
    }

    check_future(ctx, traj, cfg);
    check_geometry(ctx, traj);
}

fn check_future(ctx: &mut Ctx, traj: &Trajectory, cfg: &SolverConfig) {
    const NAME: &str = "monotone future iteration";
    let Some(e0) = traj.events.t0 else {
        ctx.push(NAME, false, "no T0 event".into());
        return;
    };
    let mut p0 = e0.state;
    p0.eta = 0.0;
    let t_max = p0.t + 10.0;
    let run = match iterate_future(&p0, 0.1, t_max, 1e-3, 1e-10, 2000) {
        Ok(r) => r,
        Err(e) => {
            ctx.push(NAME, false, e.to_string());
            return;
        }
    };
    let reference = match integrate_from(p0, t_max, cfg) {
        Ok(r) => r,
        Err(e) => {
            ctx.push(NAME, false, e.to_string());
            return;
        }
    };
    let mono = monotonicity_report(&run);
    let (ex, ee) = compare_on_grid(run.limit_xi(), run.limit_eta(), &reference.samples);
    ctx.push(
        NAME,
        run.converged && mono.ordered && ex.max(ee) <= 1e-6,
        format!(
            "{} iterates, worst violation {:.2e}, limit vs integrator {:.2e}",
            run.iterates_xi.len(),
            mono.worst_violation,
            ex.max(ee)
        ),
    );
}

fn check_geometry(ctx: &mut Ctx, traj: &Trajectory) {
    let (theta, sol) = match (deflection(traj), to_radial(traj)) {
        (Ok(t), Ok(s)) => (t, s),
        (Err(e), _) | (_, Err(e)) => {
            ctx.push("Pokhozaev identity", false, e.to_string());
            return;
        }
    };
    let pk = pokhozaev_relative(sol.kappa, sol.alpha);
    let k_th = 2.0 * PI * (1.0 - theta.cos());
    let a_th = 2.0 * 2f64.sqrt() * PI * theta.sin().abs();
    let rk = (sol.kappa - k_th).abs() / sol.kappa;
    let ra = (sol.alpha - a_th).abs() / sol.alpha;
    ctx.push(
        "Pokhozaev identity",
        pk.abs() <= 1e-3 && rk <= 1e-3 && ra <= 1e-3 && !sol.quadrature.partial,
        format!("relative residual {pk:.2e}; kappa vs theta {rk:.2e}; alpha vs theta {ra:.2e}"),
    );
    match asymptotic_fit(&sol) {
        Ok(fit) => {
            let su = (fit.u_slope + sol.kappa / (2.0 * PI)).abs() / (sol.kappa / (2.0 * PI));
            let sk = (fit.k_slope + sol.alpha / (2.0 * PI)).abs() / (sol.alpha / (2.0 * PI));
            ctx.push(
                "asymptotic slopes",
                su <= 1e-3 && sk <= 1e-3,
                format!("u slope rel err {su:.2e}; K slope rel err {sk:.2e}"),
            );
        }
        Err(e) => ctx.push("asymptotic slopes", false, e.to_string()),
    }
}
