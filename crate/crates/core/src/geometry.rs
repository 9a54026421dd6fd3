//! Radial surfaces `(u, K)` reconstructed from scattering trajectories, their
//! area and integral curvature, and the identities linking them to the
//! deflection angle.

use std::f64::consts::{LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::Trajectory;

/// Fraction of the `t`-range, counted from the end, used by [`asymptotic_fit`].
pub const FIT_WINDOW_FRACTION: f64 = 0.3;
/// [`asymptotic_fit`] needs the samples to reach `T0 + MIN_FIT_SPAN`.
pub const MIN_FIT_SPAN: f64 = 10.0;

/// Windowed quadrature plus exponential tail corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub kappa: f64,
    pub alpha: f64,
    pub kappa_tails: (f64, f64),
    pub alpha_tails: (f64, f64),
    /// The future tail could not be fitted; values are window-only.
    pub partial: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    /// Log-uniform radii `e^{t_k}`. Overflows to infinity beyond `t ~ 709`;
    /// computations use [`RadialSolution::log_r`].
    pub r_grid: Vec<f64>,
    /// `t_k = ln r_k`.
    pub log_r: Vec<f64>,
    pub u_values: Vec<f64>,
    pub k_values: Vec<f64>,
    pub kappa: f64,
    pub alpha: f64,
    /// `K(0)`, extrapolated from the innermost sample; equals `sqrt(2) eta_in`.
    pub k_star: f64,
    /// `u(0)`, extrapolated likewise; equals `xi_in - ln(2)/4`.
    pub u_center: f64,
    /// Centre of symmetry; radial solutions are built about the origin.
    pub center: [f64; 2],
    pub quadrature: Quadrature,
}

impl RadialSolution {
    fn log_step(&self) -> f64 {
        let n = self.log_r.len() - 1;
        (self.log_r[n] - self.log_r[0]) / n as f64
    }

    fn t_at(&self, k: usize) -> f64 {
        self.log_r[k]
    }

    /// Image under `x -> k x`, `u -> u - ln k`. Area and integral curvature
    /// are recomputed from the transformed data.
    pub fn scaled(&self, k: f64) -> Result<RadialSolution> {
        let mut out = self.clone();
        let lk = k.ln();
        out.r_grid.iter_mut().for_each(|r| *r *= k);
        out.log_r.iter_mut().for_each(|t| *t += lk);
        out.u_values.iter_mut().for_each(|u| *u -= lk);
        out.u_center -= lk;
        out.quadrature = curvature_area_quadrature(&out)?;
        out.kappa = out.quadrature.kappa;
        out.alpha = out.quadrature.alpha;
        Ok(out)
    }
}

/// Maps the samples of an escaped trajectory to `(r, u, K)` with
/// `r = e^t`, `u = xi - t - ln(2)/4`, `K = sqrt(2) eta`.
pub fn to_radial(traj: &Trajectory) -> Result<RadialSolution> {
    if !traj.escaped() {
        return Err(Error::NotEscaped(format!("outcome {:?}", traj.outcome)));
    }
    let shift = 0.25 * LN_2;
    // Centre values extrapolated with the incoming expansion
    // `eta ~ eta_in - e^{2 xi} / 8`, `xi ~ xi_in + t - eta e^{2 xi} / 4`.
    let p0 = traj.first();
    let w0 = (2.0 * p0.xi).exp();
    let mut sol = RadialSolution {
        r_grid: traj.samples.iter().map(|p| p.t.exp()).collect(),
        log_r: traj.samples.iter().map(|p| p.t).collect(),
        u_values: traj.samples.iter().map(|p| p.xi - p.t - shift).collect(),
        k_values: traj.samples.iter().map(|p| SQRT_2 * p.eta).collect(),
        kappa: f64::NAN,
        alpha: f64::NAN,
        k_star: SQRT_2 * (p0.eta + 0.125 * w0),
        u_center: p0.xi - p0.t + 0.25 * p0.eta * w0 - shift,
        center: [0.0, 0.0],
        quadrature: Quadrature {
            kappa: f64::NAN,
            alpha: f64::NAN,
            kappa_tails: (0.0, 0.0),
            alpha_tails: (0.0, 0.0),
            partial: true,
        },
    };
    sol.quadrature = curvature_area_quadrature(&sol)?;
    sol.kappa = sol.quadrature.kappa;
    sol.alpha = sol.quadrature.alpha;
    Ok(sol)
}

/// Trapezoid sum of `f` over the uniform `t` grid with tails: the past tail
/// assumes `f ~ e^{2t}`, the future tail an exponential fitted to the last
/// decade of samples. Returns `(window + tails, past, future, fitted)`.
fn integrate_with_tails(f: &[f64], h: f64) -> (f64, f64, f64, bool) {
    let n = f.len();
    let window: f64 = h * (f.iter().sum::<f64>() - 0.5 * (f[0] + f[n - 1]));
    let past = 0.5 * f[0];
    let back = ((1.0 / h).round() as usize).clamp(1, n - 1);
    let (fa, fb) = (f[n - 1 - back].abs(), f[n - 1].abs());
    let rate = (fb / fa).ln() / (back as f64 * h);
    if fb == 0.0 {
        return (window + past, past, 0.0, true);
    }
    if rate.is_finite() && rate < 0.0 {
        let future = -f[n - 1] / rate;
        (window + past + future, past, future, true)
    } else {
        (window + past, past, 0.0, false)
    }
}

/// `kappa = int K e^{2u} dx` and `alpha = int e^{2u} dx` over the plane,
/// computed as `2 pi int (.) r^2 dt` on the sample grid.
pub fn curvature_area_quadrature(sol: &RadialSolution) -> Result<Quadrature> {
    let n = sol.r_grid.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(format!("{n} radial samples")));
    }
    let h = sol.log_step();
    let density: Vec<f64> = sol
        .log_r
        .iter()
        .zip(&sol.u_values)
        .map(|(t, u)| (2.0 * (t + u)).exp())
        .collect();
    let curv: Vec<f64> = density
        .iter()
        .zip(&sol.k_values)
        .map(|(d, k)| d * k)
        .collect();
    let (ik, kp, kf, ok_k) = integrate_with_tails(&curv, h);
    let (ia, ap, af, ok_a) = integrate_with_tails(&density, h);
    Ok(Quadrature {
        kappa: 2.0 * PI * ik,
        alpha: 2.0 * PI * ia,
        kappa_tails: (2.0 * PI * kp, 2.0 * PI * kf),
        alpha_tails: (2.0 * PI * ap, 2.0 * PI * af),
        partial: !(ok_k && ok_a),
    })
}

/// Integral curvature and area implied by a deflection angle in
/// `(-pi, -pi/2)`: `kappa = 2 pi (1 - cos theta)`,
/// `alpha = 2 sqrt(2) pi |sin theta|`.
pub fn theta_identities(theta: f64) -> Result<(f64, f64)> {
    if !(theta > -PI && theta < -0.5 * PI) {
        return Err(Error::Domain {
            op: "theta_identities",
            detail: format!("theta = {theta} outside (-pi, -pi/2)"),
        });
    }
    Ok((
        2.0 * PI * (1.0 - theta.cos()),
        2.0 * SQRT_2 * PI * theta.sin().abs(),
    ))
}

/// `alpha^2 - 2 kappa (4 pi - kappa)`; zero for every solution.
pub fn pokhozaev_residual(kappa: f64, alpha: f64) -> f64 {
    alpha * alpha - 2.0 * kappa * (4.0 * PI - kappa)
}

/// [`pokhozaev_residual`] divided by `16 pi^2`.
pub fn pokhozaev_relative(kappa: f64, alpha: f64) -> f64 {
    pokhozaev_residual(kappa, alpha) / (16.0 * PI * PI)
}

/// Max-norm residuals of the radial equations written in `t = ln r`:
/// `u_tt + r^2 K e^{2u}` and `K_tt + r^2 e^{2u}`, by centred differences.
pub fn pde_residual(sol: &RadialSolution) -> Result<(f64, f64)> {
    Ok(pde_residual_profile(sol)?
        .iter()
        .fold((0.0f64, 0.0f64), |acc, (ru, rk)| {
            (acc.0.max(ru.abs()), acc.1.max(rk.abs()))
        }))
}

/// Pointwise residuals at interior nodes `1..n-1`.
pub fn pde_residual_profile(sol: &RadialSolution) -> Result<Vec<(f64, f64)>> {
    let n = sol.r_grid.len();
    if n < 5 {
        return Err(Error::GridTooCoarse(format!("{n} radial samples, need 5")));
    }
    let h = sol.log_step();
    let u = &sol.u_values;
    let k = &sol.k_values;
    Ok((1..n - 1)
        .map(|i| {
            let t = sol.t_at(i);
            let d = (2.0 * (t + u[i])).exp();
            let u_tt = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let k_tt = (k[i + 1] - 2.0 * k[i] + k[i - 1]) / (h * h);
            (u_tt + k[i] * d, k_tt + d)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    /// Slope of `u` against `ln r`; tends to `-kappa / 2 pi`.
    pub u_slope: f64,
    pub u_intercept: f64,
    /// Slope of `K` against `ln r`; tends to `-alpha / 2 pi`.
    pub k_slope: f64,
    pub k_intercept: f64,
    pub fit_window: (f64, f64),
    /// Largest deviation from either fitted line inside the window.
    pub residual: f64,
}

fn zero_crossing_t(sol: &RadialSolution) -> Option<f64> {
    sol.k_values.windows(2).enumerate().find_map(|(i, w)| {
        (w[0] > 0.0 && w[1] <= 0.0).then(|| {
            let s = w[0] / (w[0] - w[1]);
            sol.t_at(i) + s * sol.log_step()
        })
    })
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dev = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).abs())
        .fold(0.0, f64::max);
    (slope, intercept, dev)
}

/// Least-squares lines of `u` and `K` against `ln r` over the last 30% of the
/// sampled range, which must extend at least 10 time units past `T0`.
pub fn asymptotic_fit(sol: &RadialSolution) -> Result<AsymptoticFit> {
    let n = sol.r_grid.len();
    if n < 5 {
        return Err(Error::WindowTooShort(format!("{n} samples")));
    }
    let t0 =
        zero_crossing_t(sol).ok_or_else(|| Error::WindowTooShort("K never changes sign".into()))?;
    let (t_first, t_last) = (sol.t_at(0), sol.t_at(n - 1));
    if t_last < t0 + MIN_FIT_SPAN {
        return Err(Error::WindowTooShort(format!(
            "samples end at t = {t_last}, need T0 + {MIN_FIT_SPAN} = {}",
            t0 + MIN_FIT_SPAN
        )));
    }
    let t_lo = t_last - FIT_WINDOW_FRACTION * (t_last - t_first);
    let start = (0..n).find(|&i| sol.t_at(i) >= t_lo).unwrap_or(0);
    let ts: Vec<f64> = (start..n).map(|i| sol.t_at(i)).collect();
    let (u_slope, u_intercept, du) = line_fit(&ts, &sol.u_values[start..]);
    let (k_slope, k_intercept, dk) = line_fit(&ts, &sol.k_values[start..]);
    Ok(AsymptoticFit {
        u_slope,
        u_intercept,
        k_slope,
        k_intercept,
        fit_window: (sol.r_grid[start], sol.r_grid[n - 1]),
        residual: du.max(dk),
    })
}

/// Intercepts predicted for the fitted lines:
/// `u(0) + (1/2pi) int ln|y| K e^{2u} dy` and `K(0) + (1/2pi) int ln|y| e^{2u} dy`.
pub fn predicted_intercepts(sol: &RadialSolution) -> (f64, f64) {
    let h = sol.log_step();
    let n = sol.r_grid.len();
    let (mut iu, mut ik) = (0.0, 0.0);
    for i in 0..n {
        let t = sol.t_at(i);
        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
        let d = (2.0 * (t + sol.u_values[i])).exp();
        iu += w * t * sol.k_values[i] * d;
        ik += w * t * d;
    }
    (sol.u_center + iu, sol.k_star + ik)
}
