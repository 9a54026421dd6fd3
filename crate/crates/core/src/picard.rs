//! Fixed-point iterations on uniform time grids.
//!
//! The past zone uses the monotone iteration
//!
//! ```text
//! xi^(n)(t)    = xi_in + t - I[eta^(n) e^{2 xi^(n)}](t)
//! eta^(n+1)(t) = eta_in    - I[e^{2 xi^(n)} / 2](t)
//! ```
//!
//! with `I[f](t) = int_{-inf}^t int_{-inf}^s f = int_{-inf}^t (t - s) f(s) ds`
//! and `eta^(0) = eta_in`. The future zone `t >= T0` uses the damped maps
//! `F_eps`, `G_eps` started from the linear continuation of the data at `T0`.
//!
//! Double integrals are trapezoid sums of `(t_k - s) f(s)`; the node `s = t_k`
//! carries zero weight, so `xi^(n)` can be marched explicitly even though it
//! appears on both sides of its equation.

use serde::{Deserialize, Serialize};

use crate::closed_forms::{explicit_bounds, xi0, AsymptoticData};
use crate::dynamics::PhasePoint;
use crate::error::{Error, Result};
use crate::integrator::SolverConfig;

/// Default damping for the future-zone iteration.
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub t_min: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn from_fn(t_min: f64, step: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|k| f(t_min + k as f64 * step)).collect();
        Self {
            t_min,
            step,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t_min + k as f64 * self.step
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.len().saturating_sub(1))
    }

    pub fn sup_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (self.t(k), v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardRun {
    /// `xi^(n)` (past zone) or `X^(n)` (future zone), `n = 0, 1, ...`.
    pub iterates_xi: Vec<GridFunction>,
    pub iterates_eta: Vec<GridFunction>,
    pub converged: bool,
    /// `sup|xi^(n+1) - xi^(n)| + sup|eta^(n+1) - eta^(n)|` per iteration.
    pub sup_diff_history: Vec<f64>,
    pub tol: f64,
}

impl PicardRun {
    pub fn limit_xi(&self) -> &GridFunction {
        self.iterates_xi.last().expect("run has iterates")
    }

    pub fn limit_eta(&self) -> &GridFunction {
        self.iterates_eta.last().expect("run has iterates")
    }

    /// Converts a run that hit `max_iter` into an error.
    pub fn into_converged(self, what: &'static str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what,
                iterations: self.sup_diff_history.len(),
                last_change: self.sup_diff_history.last().copied().unwrap_or(f64::NAN),
            })
        }
    }
}

/// Computes `D_k = sum_{j<k} w_j (tau_k - tau_j) f_j` for trapezoid weights on
/// a uniform grid, plus an optional tail `tail(k)`.
fn double_integral(f: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let (mut s0, mut s1) = (0.0, 0.0);
    for (k, &fk) in f.iter().enumerate() {
        let tau = k as f64 * step;
        out.push(tau * s0 - s1);
        let w = if k == 0 { 0.5 * step } else { step };
        s0 += w * fk;
        s1 += w * tau * fk;
    }
    out
}

/// `int_{-inf}^{t_min} (t - s) c e^{2 s} ds`.
fn exp_tail(c: f64, t_min: f64, t: f64) -> f64 {
    c * (2.0 * t_min).exp() * (0.5 * (t - t_min) + 0.25)
}

struct PastGrid {
    a: AsymptoticData,
    t_min: f64,
    step: f64,
    len: usize,
}

impl PastGrid {
    fn xi_of(&self, eta: &GridFunction) -> GridFunction {
        let a = &self.a;
        let c = a.eta_in * (2.0 * a.xi_in).exp();
        let mut values = Vec::with_capacity(self.len);
        let (mut s0, mut s1) = (0.0, 0.0);
        for k in 0..self.len {
            let t = self.t_min + k as f64 * self.step;
            let tau = k as f64 * self.step;
            let xi = a.xi_in + t - exp_tail(c, self.t_min, t) - (tau * s0 - s1);
            let f = eta.values[k] * (2.0 * xi).exp();
            let w = if k == 0 { 0.5 * self.step } else { self.step };
            s0 += w * f;
            s1 += w * tau * f;
            values.push(xi);
        }
        GridFunction {
            t_min: self.t_min,
            step: self.step,
            values,
        }
    }

    fn eta_of(&self, xi: &GridFunction) -> GridFunction {
        let a = &self.a;
        let c = 0.5 * (2.0 * a.xi_in).exp();
        let f: Vec<f64> = xi.values.iter().map(|x| 0.5 * (2.0 * x).exp()).collect();
        let d = double_integral(&f, self.step);
        let values = d
            .iter()
            .enumerate()
            .map(|(k, dk)| {
                let t = self.t_min + k as f64 * self.step;
                a.eta_in - exp_tail(c, self.t_min, t) - dk
            })
            .collect();
        GridFunction {
            t_min: self.t_min,
            step: self.step,
            values,
        }
    }
}

/// Past-zone monotone iteration on the grid that the integrator uses for the
/// same data (`t_min` from [`SolverConfig::start_time`] with defaults).
pub fn iterate_past(
    a: &AsymptoticData,
    t_handoff: f64,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PicardRun> {
    let t_min = SolverConfig::default().start_time(a);
    iterate_past_from(a, t_min, t_handoff, step, tol, max_iter)
}

/// As [`iterate_past`] with an explicit grid origin. The grid is
/// `t_min + k * step` for all nodes not beyond `t_handoff`. A negative `tol`
/// runs all `max_iter` iterations.
pub fn iterate_past_from(
    a: &AsymptoticData,
    t_min: f64,
    t_handoff: f64,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PicardRun> {
    let bounds = explicit_bounds(a)?;
    if t_handoff > bounds.t0_lower {
        return Err(Error::Precondition {
            op: "iterate_past",
            detail: format!(
                "t_handoff {t_handoff} beyond T0 lower bound {}",
                bounds.t0_lower
            ),
        });
    }
    if !(step > 0.0) || !(t_handoff > t_min) {
        return Err(Error::Precondition {
            op: "iterate_past",
            detail: "need step > 0 and t_handoff > t_min".into(),
        });
    }
    let len = ((t_handoff - t_min) / step + 1e-9).floor() as usize + 1;
    let grid = PastGrid {
        a: *a,
        t_min,
        step,
        len,
    };

    let mut xi = GridFunction::from_fn(t_min, step, len, |t| {
        xi0(t, a).expect("eta_in checked positive")
    });
    let mut eta = GridFunction::from_fn(t_min, step, len, |_| a.eta_in);
    let mut run = PicardRun {
        iterates_xi: vec![xi.clone()],
        iterates_eta: vec![eta.clone()],
        converged: false,
        sup_diff_history: Vec::new(),
        tol,
    };
    for _ in 0..max_iter {
        let eta_next = grid.eta_of(&xi);
        let xi_next = grid.xi_of(&eta_next);
        let diff = xi_next.sup_diff(&xi) + eta_next.sup_diff(&eta);
        run.sup_diff_history.push(diff);
        run.iterates_xi.push(xi_next.clone());
        run.iterates_eta.push(eta_next.clone());
        xi = xi_next;
        eta = eta_next;
        if diff <= tol {
            run.converged = true;
            break;
        }
    }
    Ok(run)
}

/// Future-zone iteration `X^(n+1) = F_eps(X^(n), Y^(n))`,
/// `Y^(n+1) = G_eps(X^(n), Y^(n))` on `[p0.t, t_max]`.
pub fn iterate_future(
    p0: &PhasePoint,
    epsilon: f64,
    t_max: f64,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PicardRun> {
    let pre = |detail: String| Error::Precondition {
        op: "iterate_future",
        detail,
    };
    if p0.eta.abs() > 1e-9 {
        return Err(pre(format!("eta(T0) = {} is not zero", p0.eta)));
    }
    if !(p0.xi_dot < 0.0) {
        return Err(pre(format!("xi_dot(T0) = {} must be negative", p0.xi_dot)));
    }
    if !(p0.eta_dot < 0.0 && p0.eta_dot > -1.0) {
        return Err(pre(format!(
            "eta_dot(T0) = {} must lie in (-1, 0)",
            p0.eta_dot
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(pre(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    if !(step > 0.0) || !(t_max > p0.t) {
        return Err(pre("need step > 0 and t_max > T0".into()));
    }
    let t0 = p0.t;
    let len = ((t_max - t0) / step + 1e-9).floor() as usize + 1;
    let x_lin = GridFunction::from_fn(t0, step, len, |t| p0.xi_dot * (t - t0) + p0.xi);
    let y_lin = GridFunction::from_fn(t0, step, len, |t| p0.eta_dot * (t - t0));

    let mut x = x_lin.clone();
    let mut y = y_lin.clone();
    let mut run = PicardRun {
        iterates_xi: vec![x.clone()],
        iterates_eta: vec![y.clone()],
        converged: false,
        sup_diff_history: Vec::new(),
        tol,
    };
    for _ in 0..max_iter {
        let fx: Vec<f64> = x
            .values
            .iter()
            .zip(&y.values)
            .map(|(xv, yv)| yv * (2.0 * xv).exp())
            .collect();
        let fy: Vec<f64> = x.values.iter().map(|xv| 0.5 * (2.0 * xv).exp()).collect();
        let dx = double_integral(&fx, step);
        let dy = double_integral(&fy, step);
        let mut x_next = x.clone();
        let mut y_next = y.clone();
        for k in 0..len {
            x_next.values[k] = x.values[k] - epsilon * (x.values[k] - x_lin.values[k] + dx[k]);
            y_next.values[k] = y.values[k] - epsilon * (y.values[k] - y_lin.values[k] + dy[k]);
        }
        if let Some(k) = (1..len).find(|&k| y_next.values[k] > 0.0) {
            return Err(pre(format!(
                "Y became positive at t = {} (iterate {})",
                y_next.t(k),
                run.iterates_eta.len()
            )));
        }
        let diff = x_next.sup_diff(&x) + y_next.sup_diff(&y);
        run.sup_diff_history.push(diff);
        run.iterates_xi.push(x_next.clone());
        run.iterates_eta.push(y_next.clone());
        x = x_next;
        y = y_next;
        if diff <= tol {
            run.converged = true;
            break;
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub ordered: bool,
    /// Largest amount by which an iterate moved the wrong way (0 if none).
    pub worst_violation: f64,
    pub node: usize,
    /// Index `n` of the later iterate in the offending pair.
    pub iterate: usize,
}

/// Checks the `xi` ladder increases and the `eta` ladder decreases in `n`,
/// allowing `10 * tol` for quadrature error.
pub fn monotonicity_report(run: &PicardRun) -> MonotonicityReport {
    monotonicity_report_with(run, 10.0 * run.tol)
}

pub fn monotonicity_report_with(run: &PicardRun, allowance: f64) -> MonotonicityReport {
    let mut worst = MonotonicityReport {
        ordered: true,
        worst_violation: 0.0,
        node: 0,
        iterate: 0,
    };
    let pairs = run
        .iterates_xi
        .windows(2)
        .zip(run.iterates_eta.windows(2))
        .enumerate();
    for (n, (xs, es)) in pairs {
        for k in 0..xs[0].len() {
            let v = (xs[0].values[k] - xs[1].values[k]).max(es[1].values[k] - es[0].values[k]);
            if v > worst.worst_violation {
                worst.worst_violation = v;
                worst.node = k;
                worst.iterate = n + 1;
            }
        }
    }
    worst.ordered = worst.worst_violation <= allowance;
    worst
}

/// Maximum defect of the second-difference form of the equations of motion
/// at interior nodes of the run's final iterate.
pub fn ode_residual(run: &PicardRun) -> (f64, f64) {
    let xi = run.limit_xi();
    let eta = run.limit_eta();
    let h2 = xi.step * xi.step;
    let mut res = (0.0f64, 0.0f64);
    for k in 1..xi.len().saturating_sub(1) {
        let e2 = (2.0 * xi.values[k]).exp();
        let dxi = (xi.values[k + 1] - 2.0 * xi.values[k] + xi.values[k - 1]) / h2;
        let deta = (eta.values[k + 1] - 2.0 * eta.values[k] + eta.values[k - 1]) / h2;
        res.0 = res.0.max((dxi + eta.values[k] * e2).abs());
        res.1 = res.1.max((deta + 0.5 * e2).abs());
    }
    res
}

/// Checks the `n`-independent bounds of the past zone on every iterate:
/// `eta > 0`, `xi < xi_in + t` and `eta > eta_in - e^{2 xi_in + 2 t} / 8`.
/// Returns the largest violation (with `slack` subtracted), `<= 0` if none.
pub fn past_zone_bound_violation(run: &PicardRun, a: &AsymptoticData) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (xi, eta) in run.iterates_xi.iter().zip(&run.iterates_eta) {
        for k in 0..xi.len() {
            let t = xi.t(k);
            let lower = a.eta_in - 0.125 * (2.0 * (a.xi_in + t)).exp();
            worst = worst
                .max(-eta.values[k])
                .max(xi.values[k] - (a.xi_in + t))
                .max(lower - eta.values[k]);
        }
    }
    worst
}
