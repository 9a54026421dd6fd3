#![allow(dead_code)]

use plate_buckling::closed_forms::asymptotic_start_state;
use plate_buckling::{integrate, AsymptoticData, SolverConfig, Trajectory};

/// Deflection at `eta_in = 8`, `xi_in = 0` from [`rk4_deflection`] with
/// `h = 1e-4` on `[-15, 40]`, frozen before the adaptive integrator existed.
pub const THETA_ORACLE_ETA8: f64 = -3.015767951168045;

fn accel(y: &[f64; 4]) -> [f64; 4] {
    let e = (2.0 * y[0]).exp();
    [y[1], -y[2] * e, y[3], -0.5 * e]
}

/// Classical fixed-step fourth-order Runge-Kutta over `[t0, t1]` from the
/// asymptotic start state; returns the final `[xi, xi_dot, eta, eta_dot]`.
pub fn rk4_final(a: &AsymptoticData, t0: f64, t1: f64, h: f64) -> [f64; 4] {
    let p = asymptotic_start_state(t0, a).expect("start state");
    let mut y = [p.xi, p.xi_dot, p.eta, p.eta_dot];
    let n = ((t1 - t0) / h).round() as usize;
    for _ in 0..n {
        let k1 = accel(&y);
        let y2: [f64; 4] = std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]);
        let k2 = accel(&y2);
        let y3: [f64; 4] = std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]);
        let k3 = accel(&y3);
        let y4: [f64; 4] = std::array::from_fn(|i| y[i] + h * k3[i]);
        let k4 = accel(&y4);
        for i in 0..4 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

pub fn rk4_deflection(a: &AsymptoticData, t0: f64, t1: f64, h: f64) -> f64 {
    let y = rk4_final(a, t0, t1, h);
    y[3].atan2(y[1])
}

pub fn escaped(eta_in: f64) -> Trajectory {
    let traj = integrate(&AsymptoticData::new(0.0, eta_in), &SolverConfig::default()).unwrap();
    assert!(traj.escaped(), "eta_in = {eta_in}: {:?}", traj.outcome);
    traj
}
